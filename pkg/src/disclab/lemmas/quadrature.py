"""Vectorized product rules for the lemma integrals.

Planar integrals are written in polar coordinates ``x = rho theta`` around the
origin.  Along each ray, the cutoff ``(1 + |F(rho) - Y|)^{-beta}`` with
``F(rho) = g(rho theta) + g(k - rho theta)`` has a single kink, because ``F`` is
convex in ``rho`` and nondecreasing for ``rho >= 0``.  Panels are graded
geometrically around that kink, around the origin and out to the tail.  The
first panel at the origin uses a Gauss-Jacobi rule carrying the weight ``rho^p``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from ..errors import DomainError

_LADDER = 2.0 ** np.arange(-6, 63)
_RIDGE = 2.0 ** np.arange(0, 23)
_TAIL_SPAN = 2.0**20
_BISECT = 90


@lru_cache(maxsize=None)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=None)
def _gj(n: int, p: float):
    return roots_jacobi(n, 0.0, p)


def euclidean(x: np.ndarray) -> np.ndarray:
    return np.hypot(x[..., 0], x[..., 1])


def support_callable(body):
    """Vectorized support function of a planar body (``None``: Euclidean norm)."""
    if body is None:
        return euclidean
    if body.dim != 2:
        raise DomainError("planar quadrature needs a body in d = 2")
    if hasattr(body, "direction_table"):
        def g(x):
            n = euclidean(x)
            u = x / np.where(n > 0, n, 1.0)[..., None]
            flat = u.reshape(-1, 2)
            return n * body.direction_table(flat)[0].reshape(n.shape)
        return g
    return lambda x: np.asarray(body.support(x), dtype=float)


def ray_integrals(theta: np.ndarray, k: np.ndarray, Y: float, g, beta: float, power: float,
                  alpha_k: float, lo: np.ndarray, hi: np.ndarray, order: int) -> np.ndarray:
    """``int_lo^hi rho^power |k - rho theta|^{-alpha_k} (1 + |F - Y|)^{-beta} drho`` per ray.

    ``hi`` may be infinite.  Past ``L = 2^20 max(|k|, |Y|, 1)`` the integrand is
    replaced by its leading power law and integrated in closed form.
    """
    theta = np.asarray(theta, dtype=float)
    k = np.asarray(k, dtype=float)
    n = theta.shape[0]
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,)).copy()
    hi = np.maximum(hi, lo)
    scale = max(float(np.linalg.norm(k)), abs(Y), 1.0)
    L = scale * _TAIL_SPAN
    top = np.minimum(hi, L)

    def F(rho):
        x = rho[..., None] * theta.reshape((n,) + (1,) * (rho.ndim - 1) + (2,))
        return g(x) + g(k - x)

    f_lo, f_top = F(lo), F(top)
    has = (f_lo < Y) & (f_top > Y)
    a, b = lo.copy(), top.copy()
    for _ in range(_BISECT):
        mid = 0.5 * (a + b)
        up = F(mid) > Y
        b = np.where(up, mid, b)
        a = np.where(up, a, mid)
    r = np.where(has, 0.5 * (a + b), np.where(f_lo >= Y, lo, top))
    h = 1e-6 * np.maximum(r, 1.0)
    slope = (F(r + h) - F(r - h)) / (2 * h)
    w = 1.0 / np.maximum(slope, 1.0 / scale)

    ladder = _LADDER[_LADDER <= 2 * L]
    cols = [lo[:, None], top[:, None], np.broadcast_to(ladder, (n, ladder.size)),
            r[:, None], r[:, None] + w[:, None] * _RIDGE, r[:, None] - w[:, None] * _RIDGE]
    bps = np.sort(np.clip(np.concatenate(cols, axis=1), lo[:, None], top[:, None]), axis=1)
    left, right = bps[:, :-1], bps[:, 1:]
    half = 0.5 * (right - left)

    x, wx = _gl(order)
    rho = left[..., None] + half[..., None] * (x + 1)
    rho = np.where(half[..., None] > 0, rho, 1.0)
    wts = half[..., None] * wx * rho**power
    sing = left == 0.0
    if np.any(sing):
        xj, wj = _gj(order, float(power))
        rj = np.maximum(right[..., None], 1e-300) * 0.5 * (xj + 1)
        wjt = (0.5 * right[..., None]) ** (power + 1) * wj
        rho = np.where(sing[..., None], rj, rho)
        wts = np.where(sing[..., None], wjt, wts)
    wts = np.where(half[..., None] > 0, wts, 0.0)
    vals = (1 + np.abs(F(rho) - Y)) ** (-beta)
    if alpha_k:
        xk = rho[..., None] * theta[:, None, None, :]
        vals = vals * euclidean(k - xk) ** (-alpha_k)
    out = np.sum(wts * vals, axis=(1, 2))

    far = hi > L
    if np.any(far):
        # leading behaviour past L: rho^e-type power with F ~ rho (g(theta) + g(-theta))
        e = power - alpha_k - beta + 1
        if np.any(np.isinf(hi)) and not e < 0:
            raise DomainError("integrand is not integrable at infinity")
        c = g(theta[far]) + g(-theta[far])
        hf = hi[far]
        if abs(e) < 1e-14:
            piece = np.log(hf / L)
        else:
            piece = (np.where(np.isinf(hf), 0.0, hf**e) - L**e) / e
        out[far] += c ** (-beta) * piece
    return out


def angular_rule(center: float, specials, order: int, depth: int = 12):
    """Gauss-Legendre panels on ``[center - pi, center + pi]``.

    Panels are graded geometrically towards ``center + s`` for every ``s`` in
    ``specials`` (offsets in ``[-pi, pi]``).
    """
    pts = {-np.pi, np.pi}
    for s in specials:
        pts.add(float(s))
        for j in range(1, depth + 1):
            d = 0.5 * np.pi * 2.0**-j
            for q in (s - d, s + d):
                if -np.pi < q < np.pi:
                    pts.add(q)
    edges = np.array(sorted(pts))
    x, wx = _gl(order)
    a, b = edges[:-1], edges[1:]
    phi = (0.5 * (b - a)[:, None] * (x + 1) + a[:, None]).ravel()
    wts = (0.5 * (b - a)[:, None] * wx).ravel()
    return center + phi, wts
