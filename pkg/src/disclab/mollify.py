"""Mollifier, mollified discrepancy and the analytic family Phi on torus grids.

Every field is a trigonometric polynomial with frequencies ``|n| <= N_max``.
It is evaluated exactly at the nodes ``j / M`` of an FFT grid with
``M >= 2 N_max + 2``.

The mollifier is ``phi(x) = psi(|x| / eps) / Z`` with the C-infinity profile
``psi(t) = exp(b (sqrt(1 - t^2) - 1) - c t^2 / (1 - t^2))`` on ``t < 1``.  The
first factor concentrates the Fourier transform, and the second factor
flattens the profile to all orders at ``t = 1``.  The radial transform is
tabulated once as a Chebyshev series and resampled on a dense cubic
spline for bulk evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from numpy.polynomial import chebyshev as C
from scipy.interpolate import CubicSpline
from scipy.special import jv

from . import spectra
from .bodies import ConvexBody, Ellipsoid
from .errors import DomainError, PreconditionError, ResolutionError
from .fitting import LineFit, envelope_slope, loglog_slope

__all__ = [
    "Mollifier",
    "make_mollifier",
    "SpectralSeries",
    "build_series",
    "mollified_discrepancy",
    "mollified_coefficients",
    "phi_family",
    "RemainderReport",
    "remainder_diagnostic",
    "truncation_radius",
    "fft_grid_size",
]

PROFILE_B = 30.0
PROFILE_C = 0.5
_KAPPA_MAX = 12.0
_CHEB_NODES = 257
_QUAD_NODES = 800
_HAT_CUT = 1e-10  # |phi_hat| below this beyond the cut radius
_TAIL_TOL = 1e-8


def bump_profile(t) -> np.ndarray:
    """Unnormalized radial profile ``psi`` on ``[0, 1)``; zero outside."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    m = t < 1
    s = t[m]
    out[m] = np.exp(PROFILE_B * (np.sqrt(1 - s * s) - 1) - PROFILE_C * s * s / (1 - s * s))
    return out


def _radial_transform(kappa: np.ndarray, d: int, n: int = _QUAD_NODES) -> np.ndarray:
    """Fourier transform of ``psi(|x|)`` at radius ``kappa``, divided by its mass."""
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (x + 1)
    w = 0.5 * w
    p = bump_profile(t)
    mass = 2 * np.pi ** (d / 2) / math.gamma(d / 2) * np.sum(w * p * t ** (d - 1))
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    out = np.empty(kappa.shape)
    zero = kappa == 0
    out[zero] = 1.0
    k = kappa[~zero][:, None]
    out[~zero] = (
        2 * np.pi * k[:, 0] ** (1 - d / 2)
        * np.sum(w * p * jv(d / 2 - 1, 2 * np.pi * k * t) * t ** (d / 2), axis=1)
        / mass
    )
    return out


@dataclass(frozen=True, eq=False)
class Mollifier:
    """Radial mollifier of support radius ``epsilon`` in dimension ``dim``.

    ``hat(xi)`` returns ``phi_hat`` at ``|xi|``.  The transform is a function
    of ``kappa = epsilon |xi|``, tabulated on ``[0, kappa_max]``.  Past
    ``kappa_cut`` it stays below ``1e-10`` and is treated as zero.
    """

    dim: int
    epsilon: float
    kappa_cut: float
    kappa_max: float
    cheb: np.ndarray = field(repr=False)
    tail_envelope: float = field(repr=False)
    spline: object = field(repr=False, default=None)

    def profile_value(self, x_norm) -> np.ndarray:
        """Normalized ``phi`` at radius ``x_norm``."""
        d = self.dim
        x, w = np.polynomial.legendre.leggauss(_QUAD_NODES)
        t = 0.5 * (x + 1)
        mass = (
            2 * np.pi ** (d / 2) / math.gamma(d / 2)
            * np.sum(0.5 * w * bump_profile(t) * t ** (d - 1))
            * self.epsilon**d
        )
        return bump_profile(np.asarray(x_norm) / self.epsilon) / mass

    def kernel(self, kappa, exact: bool = False) -> np.ndarray:
        """Radial transform at ``kappa``.

        By default a dense cubic spline of the Chebyshev series is used (fast,
        error about 1e-12).  ``exact=True`` sums the series itself.
        """
        kappa = np.asarray(kappa, dtype=float)
        if exact or self.spline is None:
            out = C.chebval(2 * kappa / self.kappa_max - 1, self.cheb)
        else:
            out = self.spline(np.minimum(kappa, self.kappa_cut))
        return np.where(kappa <= self.kappa_cut, out, 0.0)

    def hat(self, xi_norm) -> np.ndarray:
        return self.kernel(self.epsilon * np.abs(np.asarray(xi_norm, dtype=float)))


def make_mollifier(body: ConvexBody | None = None, *, dim: int | None = None,
                   epsilon: float | None = None) -> Mollifier:
    """Mollifier with ``epsilon = A / 2``, ``A`` the smallest support value on the sphere."""
    if body is not None:
        dim = body.dim
        if epsilon is None:
            epsilon = 0.5 * body.support_bounds()[0]
    if dim is None or epsilon is None or not epsilon > 0:
        raise DomainError("need a body, or a dimension and a positive epsilon")
    nodes = np.cos(np.pi * (np.arange(_CHEB_NODES) + 0.5) / _CHEB_NODES)
    kappa = 0.5 * (nodes + 1) * _KAPPA_MAX
    vals = _radial_transform(kappa, dim)
    cheb = C.chebfit(nodes, vals, _CHEB_NODES - 1)
    fine = np.linspace(0, _KAPPA_MAX, 4801)
    fv = np.abs(C.chebval(2 * fine / _KAPPA_MAX - 1, cheb))
    above = np.nonzero(fv > _HAT_CUT)[0]
    cut = float(fine[above[-1] + 1])
    tail = float(np.max(fv[fine >= cut]))
    knots = np.linspace(0.0, cut, 40001)
    spline = CubicSpline(knots, C.chebval(2 * knots / _KAPPA_MAX - 1, cheb))
    return Mollifier(int(dim), float(epsilon), cut, _KAPPA_MAX, cheb, tail, spline)


def truncation_radius(moll: Mollifier, delta: float) -> int:
    """``N_max = ceil(kappa_cut / (epsilon delta))``: beyond it ``phi_hat(delta n)`` is dropped."""
    return int(math.ceil(moll.kappa_cut / (moll.epsilon * delta)))


def fft_grid_size(n_max: int) -> int:
    """Smallest power of two ``M >= 2 N_max + 2``."""
    return 1 << int(math.ceil(math.log2(2 * n_max + 2)))


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not (0 < delta <= 1):
        raise DomainError("delta must lie in (0, 1]")
    return delta


def _tail_check(moll: Mollifier, delta: float, n_max: int, re_z: float, d: int) -> None:
    """Compare the dropped mass with the retained mass of ``|phi_hat(delta n)| |n|^{-Re z}``.

    The dropped part is bounded by the tabulated sup of ``|phi_hat|`` past
    the cut radius.  It is integrated radially up to ``kappa_max``.  Past
    ``kappa_max`` a sixth-power decay envelope is assumed.
    """
    area = 2 * np.pi ** (d / 2) / math.gamma(d / 2)
    rho = np.arange(1, n_max + 1, dtype=float)
    retained = float(
        np.sum(area * rho ** (d - 1) * np.abs(moll.hat(delta * rho)) * rho ** (-re_z))
    )
    scale = moll.epsilon * delta
    hi = moll.kappa_max / scale
    s = d - re_z
    if abs(s) < 1e-12:
        mid = math.log(hi / n_max)
    else:
        mid = (hi**s - n_max**s) / s
    mid = max(mid, 0.0)
    # past kappa_max: (kappa_max / kappa)^6 envelope
    if s - 6 < 0:
        far = hi**s / (6 - s)
    else:
        far = math.inf
    dropped = area * moll.tail_envelope * (mid + far)
    if not dropped <= _TAIL_TOL * retained:
        raise ResolutionError(
            f"truncation tail {dropped:.3e} exceeds {_TAIL_TOL:g} of retained mass {retained:.3e}"
        )


@dataclass(frozen=True, eq=False)
class _FrequencyTable:
    dim: int
    grid: int
    n_max: int
    index: np.ndarray  # flat indices into the M^d grid
    nvec: np.ndarray  # retained frequencies
    nnorm: np.ndarray


def _frequencies(d: int, n_max: int, grid: int) -> _FrequencyTable:
    if grid < 2 * n_max + 2:
        raise ResolutionError(f"grid {grid} below the Nyquist bound 2*N_max+2 = {2 * n_max + 2}")
    k = np.fft.fftfreq(grid, 1.0 / grid).astype(np.int64)
    k = k[np.abs(k) <= n_max]
    pos = np.mod(k, grid)
    axes = np.meshgrid(*([k] * d), indexing="ij")
    sq = sum(a.astype(np.float64) ** 2 for a in axes)
    keep = (sq <= n_max * n_max) & (sq > 0)
    nvec = np.stack([a[keep] for a in axes], axis=-1)
    paxes = np.meshgrid(*([pos] * d), indexing="ij")
    index = np.ravel_multi_index(tuple(p[keep] for p in paxes), (grid,) * d)
    return _FrequencyTable(d, grid, n_max, index, nvec, np.sqrt(sq[keep]))


def _synthesize(table: _FrequencyTable, coef: np.ndarray, workers: int | None = None) -> np.ndarray:
    d, M = table.dim, table.grid
    full = np.zeros(M**d, dtype=complex)
    full[table.index] = coef
    out = scipy.fft.ifftn(full.reshape((M,) * d), workers=workers)
    out *= M**d
    return out


def _plan(body: ConvexBody, delta: float, moll: Mollifier | None, grid: int | None, re_z: float):
    delta = _check_delta(delta)
    moll = moll or make_mollifier(body)
    if moll.dim != body.dim:
        raise DomainError("mollifier dimension does not match the body")
    n_max = truncation_radius(moll, delta)
    _tail_check(moll, delta, n_max, re_z, body.dim)
    M = grid if grid is not None else fft_grid_size(n_max)
    return delta, moll, _frequencies(body.dim, n_max, int(M))


def mollified_coefficients(body: ConvexBody, delta: float, r: float, table: _FrequencyTable,
                           moll: Mollifier, asymptotic_fallback: bool = False) -> np.ndarray:
    """``r^d phi_hat(delta n) chi_hat(r n)`` on the retained frequencies."""
    phat = moll.hat(delta * table.nnorm)
    xi = r * table.nvec
    if isinstance(body, Ellipsoid):
        chi = spectra.ft_exact(body, xi)
    elif asymptotic_fallback:
        chi = spectra.ft_asymptotic(body, xi, 0)
    else:
        raise PreconditionError(
            "closed-form transform unavailable; pass asymptotic_fallback=True for this body"
        )
    return r**body.dim * phat * chi


def mollified_discrepancy(body: ConvexBody, delta: float, r: float, *, grid: int | None = None,
                          mollifier: Mollifier | None = None, asymptotic_fallback: bool = False,
                          workers: int | None = None) -> np.ndarray:
    """Mollified discrepancy ``D_delta(r, j / M)`` on the full FFT grid (real array)."""
    r = float(r)
    if r < 1:
        raise DomainError("r must be >= 1")
    delta, moll, table = _plan(body, delta, mollifier, grid, (body.dim + 1) / 2)
    coef = mollified_coefficients(body, delta, r, table, moll, asymptotic_fallback)
    field_ = _synthesize(table, coef, workers)
    scale = float(np.max(np.abs(field_))) or 1.0
    if float(np.max(np.abs(field_.imag))) > 1e-9 * max(scale, 1.0):
        raise ResolutionError("mollified discrepancy has a non-negligible imaginary part")
    return field_.real.copy()


@dataclass(frozen=True, eq=False)
class SpectralSeries:
    """Coefficient table powering ``Phi(delta, z, r, .)``."""

    body: ConvexBody
    delta: float
    z: complex
    h: int
    mollifier: Mollifier
    table: _FrequencyTable = field(repr=False)
    phi_hat: np.ndarray = field(repr=False)
    g_plus: np.ndarray = field(repr=False)
    g_minus: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    @property
    def n_max(self) -> int:
        return self.table.n_max

    @property
    def grid(self) -> int:
        return self.table.grid

    def with_z(self, z: complex) -> "SpectralSeries":
        """Same table with another exponent (the coefficients do not depend on ``z``)."""
        z = complex(z)
        _tail_check(self.mollifier, self.delta, self.n_max, z.real, self.body.dim)
        return SpectralSeries(self.body, self.delta, z, self.h, self.mollifier, self.table,
                              self.phi_hat, self.g_plus, self.g_minus, self.a, self.b)


def _direction_data(body: ConvexBody, u: np.ndarray, h: int):
    a, b = spectra.asymptotic_coefficients(body, u, h)
    if hasattr(body, "direction_table") and body.dim == 2:
        gp, gm = body.direction_table(u)[0], body.direction_table(-u)[0]
    else:
        gp, gm = body.support(u), body.support(-u)
    return gp, gm, a, b


def build_series(body: ConvexBody, delta: float, z: complex, h: int = 0, *,
                 mollifier: Mollifier | None = None, grid: int | None = None) -> SpectralSeries:
    """Tabulate the coefficients of ``Phi`` for ``|n| <= N_max``."""
    z = complex(z)
    delta, moll, table = _plan(body, delta, mollifier, grid, z.real)
    u = table.nvec / table.nnorm[:, None]
    gp, gm, a, b = _direction_data(body, u, h)
    return SpectralSeries(body, delta, z, int(h), moll, table, moll.hat(delta * table.nnorm),
                          table.nnorm * gp, table.nnorm * gm, a, b)


def phi_family(series: SpectralSeries, r: float, workers: int | None = None) -> np.ndarray:
    """``Phi(delta, z, r, j / M)`` on the FFT grid (complex array)."""
    r = float(r)
    if r < 1:
        raise DomainError("r must be >= 1")
    nn = series.table.nnorm
    ep = np.exp(-2j * np.pi * series.g_plus * r)
    em = np.exp(2j * np.pi * series.g_minus * r)
    coef = np.zeros(nn.shape, dtype=complex)
    for j in range(series.h + 1):
        pw = r ** (-j) * nn ** (-series.z - j)
        coef += pw * (series.a[j] * ep + series.b[j] * em)
    return _synthesize(series.table, series.phi_hat * coef, workers)


@dataclass(frozen=True)
class RemainderReport:
    """Sup norms of the remainder along a ladder of radii.

    ``fit`` is the upper-envelope log-log fit (block maxima over geometric
    blocks of radii), ``raw_fit`` the plain fit through every point.
    ``rounding_level`` is set when every sup is below ``1e-11`` of the
    l1 mass of the field, i.e. the expansion is exact up to rounding.
    """

    body: str
    delta: float
    h: int
    r: tuple[float, ...]
    sup: tuple[float, ...]
    fit: LineFit
    raw_fit: LineFit
    constant: float
    grid: int
    rounding_level: bool

    @property
    def slope(self) -> float:
        return self.fit.slope


def remainder_diagnostic(body: ConvexBody, delta: float, h: int, r_list, *,
                         grid: int | None = None, mollifier: Mollifier | None = None,
                         blocks: int = 6, workers: int | None = None) -> RemainderReport:
    """Sup norm over the grid of ``r^{-(d-1)/2} D_delta - Phi(delta, (d+1)/2, r)``.

    The difference is formed coefficient by coefficient, as
    ``r^{(d+1)/2} phi_hat (chi_hat(r n) - expansion_h(r n))``, which avoids
    cancellation between two large fields.
    """
    d = body.dim
    if not h > (d - 3) / 2:
        raise PreconditionError(f"order h={h} must exceed (d-3)/2 = {(d - 3) / 2}")
    if not isinstance(body, Ellipsoid) and h > 0:
        raise PreconditionError("higher-order coefficients exist only for balls and ellipsoids")
    rs = np.asarray(sorted(float(r) for r in r_list))
    if rs.size < 2 or rs[0] < 1:
        raise DomainError("need at least two radii, all >= 1")
    delta, moll, table = _plan(body, delta, mollifier, grid, (d + 1) / 2)
    u = table.nvec / table.nnorm[:, None]
    coeffs = spectra.asymptotic_coefficients(body, u, h)
    phat = moll.hat(delta * table.nnorm)
    sups, exact_flags = [], []
    for r in rs:
        xi = r * table.nvec
        exact = spectra.ft_exact(body, xi) if isinstance(body, Ellipsoid) else None
        if exact is None:
            raise PreconditionError("remainder diagnostics need a closed-form transform")
        approx = spectra.ft_asymptotic(body, xi, h, coefficients=coeffs)
        coef = r ** ((d + 1) / 2) * phat * (exact - approx)
        sup = float(np.max(np.abs(_synthesize(table, coef, workers))))
        mass = float(np.sum(np.abs(r ** ((d + 1) / 2) * phat * exact)))
        sups.append(sup)
        exact_flags.append(sup <= 1e-11 * mass)
    sups_arr = np.asarray(sups)
    raw = loglog_slope(rs, np.maximum(sups_arr, 1e-300))
    env = envelope_slope(rs, np.maximum(sups_arr, 1e-300), blocks=min(blocks, rs.size))
    const = float(np.max(sups_arr * rs ** (h + 1)))
    return RemainderReport(body.kind, delta, int(h), tuple(rs.tolist()), tuple(sups), env, raw,
                           const, table.grid, bool(all(exact_flags)))
