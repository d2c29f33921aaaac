"""The fourth-moment reduction for ``Phi`` in the plane (``N = 2``).

The left side ``int int |Phi(delta, z, r, x)|^4 dx dmu(r - R)`` is a grid mean of
the spectral field.  The right side is

    int_{R^2} w(k) int int A(m) A(k-m) A(n) A(k-n) K(G_k(m) - G_k(n)) dm dn dk

with ``A(m) = (1 + delta |m|)^{-lam} |m|^{-alpha} 1_{|m| > 1}``,
``w(k) = (1 + delta |k|)^{-lam}``, ``G_k(m) = g(m) + g(k - m)`` and
``K(u) = (1 + |u|)^{-beta}``.

For fixed ``k`` the measure ``A(m) A(k-m) dm`` is pushed forward by ``G_k``
onto a histogram.  The double integral becomes a quadratic form of that
histogram with the kernel ``K``, evaluated by FFT convolution.  Everything
is deterministic; two quadrature levels give the error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .. import mollify
from ..bodies import Ellipsoid
from ..errors import DomainError, PreconditionError
from ..measures import MeasureSpec, quadrature_nodes
from .quadrature import angular_rule, support_callable

__all__ = ["N2Report", "pair_mass", "pair_quadratic", "n2_rhs", "n2_lhs", "verify_n2_reduction"]

_LAM = 6.0
_WEIGHT_FLOOR = 1e-8
_BIN = 0.05
_INCONCLUSIVE = 0.10


def _rho_max(delta: float, lam: float) -> float:
    """Radius past which ``(1 + delta rho)^{-lam}`` is below the weight floor."""
    return (_WEIGHT_FLOOR ** (-1.0 / lam)) / delta


def _m_nodes(k: np.ndarray, rho_max: float, order: int):
    """Polar product rule on ``1 < |m| < rho_max`` refined near ``k``."""
    kn = float(np.hypot(*k))
    om = math.atan2(k[1], k[0]) if kn > 0 else 0.0
    depth = max(4, int(math.ceil(math.log2(max(kn, 1.0)))) + 4)
    th, wth = angular_rule(om, [0.0], order, depth)
    bps = {1.0, rho_max}
    j = 1.0
    while j < rho_max:
        bps.add(j)
        j *= 1.5
    for s in (-1.0, -0.5, 0.0, 0.5, 1.0):
        if 1.0 < kn + s < rho_max:
            bps.add(kn + s)
    edges = np.array(sorted(b for b in bps if 1.0 <= b <= rho_max))
    x, wx = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1], edges[1:]
    rho = (0.5 * (b - a)[:, None] * (x + 1) + a[:, None]).ravel()
    wr = (0.5 * (b - a)[:, None] * wx).ravel() * rho
    m = rho[:, None, None] * np.stack([np.cos(th), np.sin(th)], axis=-1)[None]
    return m.reshape(-1, 2), (wr[:, None] * wth[None]).ravel()


def _weighted_nodes(k, alpha, delta, lam, g, rho_max, order):
    m, w = _m_nodes(k, rho_max, order)
    nm = np.hypot(m[:, 0], m[:, 1])
    km = k - m
    nk = np.hypot(km[:, 0], km[:, 1])
    keep = nk > 1.0
    amp = ((1 + delta * nm) * (1 + delta * nk)) ** (-lam) * (nm * nk) ** (-alpha)
    w = np.where(keep, w * amp, 0.0)
    G = g(m) + g(km)
    return G, w


def pair_mass(k, alpha: float, delta: float, lam: float = _LAM, body=None,
              order: int = 8) -> float:
    """``int A(m) A(k - m) dm``; with ``lam = 0`` the power tail is added in closed form."""
    k = np.asarray(k, dtype=float)
    g = support_callable(body)
    if lam > 0:
        _, w = _weighted_nodes(k, alpha, delta, lam, g, _rho_max(delta, lam), order)
        return float(np.sum(w))
    if not alpha > 1:
        raise PreconditionError("lam = 0 needs alpha > 1 for integrability")
    top = 1e4 * max(float(np.hypot(*k)), 1.0)
    _, w = _weighted_nodes(k, alpha, 0.0, 0.0, g, top, order)
    return float(np.sum(w)) + 2 * np.pi * top ** (2 - 2 * alpha) / (2 * alpha - 2)


def pair_quadratic(k, alpha: float, beta: float, delta: float, lam: float = _LAM, body=None,
                   order: int = 8, bin_width: float = _BIN) -> float:
    """``int int A(m) A(k-m) A(n) A(k-n) K(G_k(m) - G_k(n)) dm dn`` for one ``k``."""
    k = np.asarray(k, dtype=float)
    g = support_callable(body)
    G, w = _weighted_nodes(k, alpha, delta, lam, g, _rho_max(delta, lam), order)
    if beta == 0:
        return float(np.sum(w)) ** 2
    lo = float(G.min())
    idx = np.floor((G - lo) / bin_width).astype(np.int64)
    H = np.bincount(idx, weights=w)
    u = np.arange(-(H.size - 1), H.size) * bin_width
    conv = fftconvolve(H, (1 + np.abs(u)) ** (-beta), mode="valid")
    return float(np.dot(H, conv))


def _k_rule(rho_max: float, order: int):
    """Polar rule for ``k`` on ``[0, 2 rho_max]`` times the upper half circle."""
    edges = [0.0, 0.5, 1.0]
    while edges[-1] < 2 * rho_max:
        edges.append(min(2 * edges[-1], 2 * rho_max))
    edges = np.array(edges)
    x, wx = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1], edges[1:]
    rad = (0.5 * (b - a)[:, None] * (x + 1) + a[:, None]).ravel()
    wr = (0.5 * (b - a)[:, None] * wx).ravel() * rad
    n_th = max(4, order // 2)
    xt, wt = np.polynomial.legendre.leggauss(n_th)
    th = 0.5 * np.pi * (xt + 1)
    # k -> -k symmetry of centrally symmetric bodies doubles the half circle
    wth = np.pi * wt
    return rad, wr, th, wth


def _rhs_once(body, alpha, beta, delta, lam, order, bin_width):
    rho_max = _rho_max(delta, lam)
    rad, wr, th, wth = _k_rule(rho_max, order)
    total = []
    for r, a in zip(rad, wr):
        wk = (1 + delta * r) ** (-lam)
        for t, b in zip(th, wth):
            k = np.array([r * math.cos(t), r * math.sin(t)])
            total.append(a * b * wk * pair_quadratic(k, alpha, beta, delta, lam, body, order,
                                                     bin_width))
    return math.fsum(total)


def n2_rhs(body, alpha: float, beta: float, delta: float, lam: float = _LAM,
           order: int = 8) -> tuple[float, float]:
    """Right side and an error estimate from a finer rule with half the bin width."""
    if not (delta > 0 and lam > 0 and beta >= 0 and alpha > 0):
        raise PreconditionError("need delta > 0, lam > 0, beta >= 0 and alpha > 0")
    coarse = _rhs_once(body, alpha, beta, delta, lam, order, _BIN)
    fine = _rhs_once(body, alpha, beta, delta, lam, order + order // 2, _BIN / 2)
    return fine, abs(fine - coarse)


def n2_lhs(body, z: float, delta: float, mu: MeasureSpec, R: float, budget: int = 32) -> float:
    """``int int |Phi(delta, z, r, x)|^4 dx dmu(r - R)`` on the FFT grid."""
    series = mollify.build_series(body, delta, complex(z), 0)
    nodes = quadrature_nodes(mu, R, budget)
    total = math.fsum(w for _, w in nodes)
    vals = [(w / total) * float(np.mean(np.abs(mollify.phi_family(series, r)) ** 4))
            for r, w in nodes]
    return math.fsum(vals)


@dataclass(frozen=True)
class N2Report:
    z: float
    beta: float
    delta: float
    R: float
    lam: float
    lhs: float
    rhs: float
    rhs_error: float
    ratio: float
    inconclusive: bool

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def verify_n2_reduction(body, z: float, beta: float | None, delta: float, mu: MeasureSpec,
                        R: float, *, lam: float = _LAM, order: int = 8) -> N2Report:
    """Both sides of the fourth-moment reduction for a planar ellipse.

    ``beta=None`` takes the decay exponent of ``mu``.  The report is flagged
    inconclusive when the right side's error estimate exceeds 10%.
    """
    if not isinstance(body, Ellipsoid) or body.dim != 2:
        raise PreconditionError("the reduction is checked for planar ellipses only")
    beta = mu.beta if beta is None else float(beta)
    if not math.isfinite(beta):
        raise PreconditionError("pass a finite beta for measures with super-polynomial decay")
    z = float(np.real(z))
    if not (0 < delta <= 1 and R >= 2):
        raise DomainError("need 0 < delta <= 1 and R >= 2")
    lhs = n2_lhs(body, z, delta, mu, R)
    rhs, err = n2_rhs(body, z, beta, delta, lam, order)
    return N2Report(z, beta, float(delta), float(R), float(lam), lhs, rhs, err, lhs / rhs,
                    bool(err > _INCONCLUSIVE * rhs))
