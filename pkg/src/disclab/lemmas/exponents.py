"""Exponent bookkeeping for the integral inequalities.

Junction tests (``beta == 1``, ``alpha == d - beta`` and so on) use an
absolute tolerance of ``1e-12`` so that decimal inputs such as ``0.4`` hit
the exact rational junctions.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DomainError

__all__ = ["ExponentPack", "eta", "tau", "sigma", "varsigma", "zeta", "kron"]

_EQ = 1e-12


def _eq(a: float, b: float) -> bool:
    return abs(a - b) <= _EQ


def kron(a: float, b: float) -> int:
    """Kronecker delta with the junction tolerance."""
    return 1 if _eq(a, b) else 0


def tau(beta: float, gamma: float) -> float:
    return min(1.0, gamma, beta)


def sigma(beta: float, gamma: float) -> int:
    """1 when ``beta = 1 <= gamma`` or ``beta = gamma <= 1``."""
    if _eq(beta, 1.0) and gamma >= 1.0 - _EQ:
        return 1
    if _eq(beta, gamma) and gamma <= 1.0 + _EQ:
        return 1
    return 0


def varsigma(d: int, beta: float, gamma: float) -> int:
    """1 exactly when ``tau = (d - 1) / 2``."""
    return kron(tau(beta, gamma), (d - 1) / 2)


def zeta(d: int, alpha: float, beta: float) -> float:
    return min(1.0, beta, d - alpha, (d - 1) / 2)


def eta(d: int, alpha: float, beta: float) -> int:
    """Logarithmic exponent of the integral bound, by dimension."""
    if d < 2:
        raise DomainError("d must be >= 2")
    if d == 2:
        if _eq(beta, 0.5):
            if _eq(alpha, 1.5):
                return 2
            if 1 < alpha < 1.5 - _EQ:
                return 1
            return 0
        if 0 < beta < 0.5 and _eq(alpha, 2 - beta):
            return 1
        if beta > 0.5 and _eq(alpha, 1.5):
            return 1
        return 0
    if d == 3:
        if _eq(beta, 1.0) and 1.5 < alpha <= 2 + _EQ:
            return 2
        if beta > 1 + _EQ and 1.5 < alpha <= 2 + _EQ:
            return 1
        if 0 < beta < 1 - _EQ and _eq(alpha, 3 - beta):
            return 1
        return 0
    if _eq(beta, 1.0) and d / 2 < alpha <= d - 1 + _EQ:
        return 1
    if 0 < beta < 1 - _EQ and _eq(alpha, d - beta):
        return 1
    return 0


@dataclass(frozen=True)
class ExponentPack:
    """Exponents ``(d, alpha, beta, gamma)`` with their derived quantities."""

    d: int
    alpha: float
    beta: float
    gamma: float = 1.0

    @property
    def tau(self) -> float:
        return tau(self.beta, self.gamma)

    @property
    def sigma(self) -> int:
        return sigma(self.beta, self.gamma)

    @property
    def varsigma(self) -> int:
        return varsigma(self.d, self.beta, self.gamma)

    @property
    def zeta(self) -> float:
        return zeta(self.d, self.alpha, self.beta)

    @property
    def eta(self) -> int:
        return eta(self.d, self.alpha, self.beta)

    def as_dict(self) -> dict:
        return {
            "d": self.d, "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma,
            "tau": self.tau, "sigma": self.sigma, "varsigma": self.varsigma,
            "zeta": self.zeta, "eta": self.eta,
        }
