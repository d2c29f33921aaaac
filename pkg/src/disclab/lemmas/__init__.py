"""Numerical checks of the integral inequalities behind the norm estimates."""

from .exponents import ExponentPack, eta, kron, sigma, tau, varsigma, zeta
from .n2 import N2Report, n2_lhs, n2_rhs, pair_mass, pair_quadratic, verify_n2_reduction
from .verify import (
    RatioReport,
    crucial_bound,
    crucial_integral,
    ellipse_bound,
    extent_growth,
    mu_integral,
    pair_integral,
    verify_crucial,
    verify_ellipse_integral,
    verify_integral_lemma,
    verify_mu_lemma,
)

__all__ = [
    "ExponentPack", "eta", "kron", "sigma", "tau", "varsigma", "zeta",
    "N2Report", "n2_lhs", "n2_rhs", "pair_mass", "pair_quadratic", "verify_n2_reduction",
    "RatioReport", "crucial_bound", "crucial_integral", "ellipse_bound", "extent_growth",
    "mu_integral", "pair_integral", "verify_crucial", "verify_ellipse_integral",
    "verify_integral_lemma", "verify_mu_lemma",
]
