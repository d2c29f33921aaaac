"""Fourier transform of the indicator of a convex body and its asymptotics.

Convention: ``chi_hat(xi) = int_body exp(-2 pi i xi . x) dx``.

Balls and ellipsoids use the Bessel closed form.  Perturbed balls are
integrated in polar (d=2) or spherical (d=3) coordinates.  The radial
integral is done in closed form, and the angular rule is refined by
doubling until two successive values agree.

The large-frequency expansion has two stationary phases:

    chi_hat(xi) ~ e^{-2 pi i g(xi)} |xi|^{-(d+1)/2} sum_j a_j(xi) |xi|^{-j}
                + e^{+2 pi i g(-xi)} |xi|^{-(d+1)/2} sum_j b_j(xi) |xi|^{-j}

with ``a_0 = (2 pi)^{-1} K(xi)^{-1/2} e^{i (d+1) pi / 4}`` and ``b_0`` its
mirror at ``-xi``.  Higher orders for ellipsoids come from the Hankel
expansion of ``J_{d/2}``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import j1, jv

from .bodies import ConvexBody, Ellipsoid, PerturbedBall
from .errors import DomainError, UnconvergedError

__all__ = [
    "ft_exact",
    "ft_asymptotic",
    "curvature_at_normal",
    "asymptotic_coefficients",
    "hankel_coefficient",
    "FT_QUADRATURE_CAP",
]

FT_QUADRATURE_CAP = 50.0
_FT_TOL = 1e-10
_MAX_ASYMPTOTIC_ORDER = 2


def _ball_profile(rho: np.ndarray, d: int) -> np.ndarray:
    """``|rho|^{-d/2} J_{d/2}(2 pi |rho|)``, the unit-ball transform, with its limit at 0."""
    rho = np.asarray(rho, dtype=float)
    out = np.empty_like(rho)
    small = rho < 1e-6
    rs = rho[~small]
    x = 2 * np.pi * rs
    if d == 2:
        out[~small] = j1(x) / rs
    elif d == 3:
        # J_{3/2}(x) = sqrt(2 / (pi x)) (sin x / x - cos x)
        out[~small] = np.sqrt(2 / (np.pi * x)) * (np.sin(x) / x - np.cos(x)) / rs**1.5
    else:
        out[~small] = rs ** (-d / 2) * jv(d / 2, x)
    # series: J_nu(x) ~ (x/2)^nu / Gamma(nu+1) (1 - x^2 / (4 (nu+1)))
    nu = d / 2
    x = 2 * np.pi * rho[small]
    out[small] = np.pi**nu / math.gamma(nu + 1) * (1 - x * x / (4 * (nu + 1)))
    return out


def _radial_integral(lam: np.ndarray, rho: np.ndarray, d: int) -> np.ndarray:
    """``int_0^rho exp(-i lam t) t^{d-1} dt`` in closed form (series near 0)."""
    lam = np.asarray(lam, dtype=float)
    rho = np.broadcast_to(np.asarray(rho, dtype=float), lam.shape)
    out = np.empty(lam.shape, dtype=complex)
    small = np.abs(lam * rho) < 0.5
    ls, rs = lam[small], rho[small]
    acc = np.zeros(ls.shape, dtype=complex)
    term = np.ones(ls.shape, dtype=complex)
    for k in range(40):
        # term = (-i lam rho)^k / k!
        acc += term * rs**d / (k + d)
        term = term * (-1j * ls * rs) / (k + 1)
    out[small] = acc
    lb, rb = lam[~small], rho[~small]
    e = np.exp(-1j * lb * rb)
    if d == 2:
        out[~small] = e * (1j * rb / lb + 1 / lb**2) - 1 / lb**2
    elif d == 3:
        out[~small] = (
            e * (1j * rb**2 / lb + 2 * rb / lb**2 - 2j / lb**3) + 2j / lb**3
        )
    else:  # pragma: no cover - perturbed balls exist only for d in {2, 3}
        raise DomainError("radial closed form available for d in {2, 3}")
    return out


def _perturbed_ft(body: PerturbedBall, xi: np.ndarray) -> complex:
    d = body.dim
    norm = float(np.linalg.norm(xi))
    if norm == 0:
        return complex(body.volume())
    if norm > FT_QUADRATURE_CAP:
        raise DomainError(f"quadrature transform limited to |xi| <= {FT_QUADRATURE_CAP}")
    n = 32
    prev = None
    while n <= 4096:
        if d == 2:
            t = 2 * np.pi * np.arange(n) / n
            u = np.stack([np.cos(t), np.sin(t)], axis=-1)
            w = np.full(n, 2 * np.pi / n)
        else:
            c, wc = np.polynomial.legendre.leggauss(n // 2)
            ph = 2 * np.pi * np.arange(n) / n
            C, P = np.meshgrid(c, ph, indexing="ij")
            S = np.sqrt(1 - C**2)
            u = np.stack([S * np.cos(P), S * np.sin(P), C], axis=-1).reshape(-1, 3)
            w = (wc[:, None] * np.full(n, 2 * np.pi / n)[None, :]).reshape(-1)
        lam = 2 * np.pi * (u @ xi)
        val = complex(np.sum(w * _radial_integral(lam, body.radial(u), d)))
        if prev is not None and abs(val - prev) <= _FT_TOL * max(1.0, abs(val)):
            return val
        prev, n = val, 2 * n
    raise UnconvergedError("angular quadrature budget exhausted", estimate=prev)


def ft_exact(body: ConvexBody, xi) -> np.ndarray | complex:
    """Fourier transform of the indicator of ``body``; vectorized over ``xi``."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1:] != (body.dim,):
        raise DomainError(f"xi must have trailing dimension {body.dim}")
    if isinstance(body, Ellipsoid):
        eta = xi @ body.matrix
        rho = np.sqrt(np.sum(eta * eta, axis=-1))
        out = body._det * _ball_profile(rho, body.dim) + 0j
        return out if out.ndim else complex(out)
    if isinstance(body, PerturbedBall):
        flat = xi.reshape(-1, body.dim)
        out = np.array([_perturbed_ft(body, v) for v in flat]).reshape(xi.shape[:-1])
        return out if out.ndim else complex(out)
    raise DomainError(f"no transform for body kind {body.kind}")


def hankel_coefficient(nu: float, k: int) -> float:
    """``a_k(nu) = prod_{m=1..k} (4 nu^2 - (2m-1)^2) / (k! 8^k)``."""
    num = 1.0
    for m in range(1, k + 1):
        num *= 4 * nu * nu - (2 * m - 1) ** 2
    return num / (math.factorial(k) * 8**k)


def curvature_at_normal(body: ConvexBody, u) -> np.ndarray | float:
    """Gaussian curvature ``K(u)`` at the boundary point with outer normal ``u``."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1:] != (body.dim,):
        raise DomainError(f"u must have trailing dimension {body.dim}")
    nrm = np.sqrt(np.sum(u * u, axis=-1))
    if np.any(np.abs(nrm - 1) > 1e-9):
        raise DomainError("u must be a unit vector")
    K = body.curvature(u)
    return float(K) if np.ndim(K) == 0 else K


def asymptotic_coefficients(body: ConvexBody, u, h: int = 0):
    """Coefficients ``a_j(u), b_j(u)`` for ``j = 0..h`` at unit directions ``u``.

    Returns two complex arrays of shape ``(h + 1,) + u.shape[:-1]``.
    """
    u = np.asarray(u, dtype=float)
    d = body.dim
    if h < 0 or int(h) != h:
        raise DomainError("order h must be a nonnegative integer")
    phase = np.exp(1j * (d + 1) * np.pi / 4)
    if isinstance(body, Ellipsoid):
        if h > _MAX_ASYMPTOTIC_ORDER:
            raise DomainError(f"orders above {_MAX_ASYMPTOTIC_ORDER} are not provided")
        s = body.support(u)
        nu = d / 2
        a, b = [], []
        for j in range(h + 1):
            c = hankel_coefficient(nu, j) / (2 * np.pi) ** (j + 1) * body._det
            sj = s ** (-(d + 1) / 2 - j)
            a.append(c * phase * (-1j) ** j * sj)
            b.append(c * np.conj(phase) * (1j) ** j * sj)
        return np.array(a), np.array(b)
    if h != 0:
        raise DomainError("only the leading order is available for this body")
    if hasattr(body, "direction_table") and d == 2 and u.size > 512:
        Kp = body.direction_table(u)[1]
        Km = body.direction_table(-u)[1]
    else:
        Kp = body.curvature(u)
        Km = body.curvature(-u)
    a0 = phase * Kp ** -0.5 / (2 * np.pi)
    b0 = np.conj(phase) * Km ** -0.5 / (2 * np.pi)
    return np.array([a0]), np.array([b0])


def ft_asymptotic(body: ConvexBody, xi, h: int = 0, coefficients=None):
    """Two-phase stationary-phase expansion truncated after order ``h``.

    ``coefficients`` may carry precomputed output of
    :func:`asymptotic_coefficients` at the unit directions of ``xi``.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1:] != (body.dim,):
        raise DomainError(f"xi must have trailing dimension {body.dim}")
    d = body.dim
    rho = np.sqrt(np.sum(xi * xi, axis=-1))
    if np.any(rho < 1):
        raise DomainError("asymptotic expansion requires |xi| >= 1")
    u = xi / rho[..., None]
    a, b = coefficients if coefficients is not None else asymptotic_coefficients(body, u, h)
    gp = body.support(xi)
    gm = body.support(-xi)
    sa = sum(a[j] * rho ** (-j) for j in range(h + 1))
    sb = sum(b[j] * rho ** (-j) for j in range(h + 1))
    out = rho ** (-(d + 1) / 2) * (np.exp(-2j * np.pi * gp) * sa + np.exp(2j * np.pi * gm) * sb)
    return out if np.ndim(out) else complex(out)
