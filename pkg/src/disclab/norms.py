"""Mixed Lebesgue norms of the normalized discrepancy and critical exponents.

``I(p, R)^p = int int |r^{-(d-1)/2} D(r, x)|^p dx dmu(r - R)``.  The r-integral
uses :func:`measures.quadrature_nodes` with weights normalized to sum one.
The x-integral is a grid mean, computed in one of two ways:

* ``exact``: exact counts at the shifts ``j / M`` (:func:`lattice.count_grid`);
* ``spectral``: the mollified discrepancy with ``delta = R^{-(d-1)/2}``.  Ellipsoids
  use the closed-form transform; other bodies use the leading asymptotic
  field ``Phi(delta, (d+1)/2, r, .)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import mollify
from .bodies import ConvexBody, Ellipsoid
from .errors import DomainError
from .fitting import fit_line
from .lattice import count_grid, volume
from .lemmas.exponents import eta
from .measures import MeasureSpec, quadrature_nodes

__all__ = [
    "CriticalExponent",
    "critical_exponent",
    "critical_lines",
    "interpolated_exponent",
    "Resolution",
    "estimate_norm",
    "estimate_norms",
    "grid_pmean",
    "GrowthFit",
    "NormScanResult",
    "scan_growth",
    "scan_norms",
    "growth_report",
    "geometric_ladder",
]

_EQ = 1e-12
BODY_CLASSES = ("generic", "ellipse")


def _eq(a: float, b: float) -> bool:
    return abs(a - b) <= _EQ


@dataclass(frozen=True)
class CriticalExponent:
    d: int
    beta: float
    body_class: str
    p_critical: float
    log_power_at_critical: float

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "beta": self.beta,
            "body_class": self.body_class,
            "p_critical": self.p_critical,
            "log_power": self.log_power_at_critical,
        }


def _check_class(d: int, beta: float, body_class: str) -> None:
    if body_class not in BODY_CLASSES:
        raise DomainError(f"body_class must be one of {BODY_CLASSES}")
    if int(d) != d or d < 2:
        raise DomainError("d must be an integer >= 2")
    if body_class == "ellipse" and d != 2:
        raise DomainError("the ellipse class exists only in d = 2")
    if not beta >= 0:
        raise DomainError("beta must be >= 0")


def critical_exponent(d: int, beta: float, body_class: str = "generic") -> CriticalExponent:
    """Critical ``p`` and the logarithmic power of the bound at that ``p``."""
    _check_class(d, beta, body_class)
    d = int(d)
    b = float(beta)
    if body_class == "ellipse":
        if b < 1 - _EQ:
            p = 4 + 2 * b
            lp = 1 / p + (1 / 12 if _eq(b, 0.4) else 0.0)
        elif _eq(b, 1):
            p, lp = 6.0, 5 / 6
        else:
            p, lp = 6.0, 2 / 3
    elif d == 2:
        if b < 0.4 - _EQ:
            p = 4 + 2 * b
            lp = 1 / p
        elif _eq(b, 0.4):
            p = 4 + 2 * b
            lp = 1 / p + 1 / 12
        elif b < 0.5 - _EQ:
            p = 4 + 10 * b / (3 + 5 * b)
            lp = 1 / p
        elif _eq(b, 0.5):
            p = 4 + 10 / 11
            lp = 1 / p + 1 / 9
        else:
            p = 4 + 10 / 11
            lp = 1 / p
    elif d == 3:
        if b < 1 - _EQ:
            p = 2 * (3 - b) / (2 - b)
            lp = 1 / p
        elif _eq(b, 1):
            p, lp = 4.0, 3 / 4
        else:
            p, lp = 4.0, 1 / 2
    else:
        if b < 1 - _EQ:
            p = 2 * (d - b) / (d - b - 1)
            lp = 1 / p
        elif _eq(b, 1):
            p, lp = 2 * (d - 1) / (d - 2), 1 / 2
        else:
            p = 2 * (d - 1) / (d - 2)
            lp = 1 / p
    return CriticalExponent(d, b, body_class, float(p), float(lp))


def critical_lines(d: int, beta: float, body_class: str = "generic"):
    """``(z2, z4, z6)``; ``z6`` is ``None`` outside the plane."""
    _check_class(d, beta, body_class)
    b = float(beta)
    z2 = d / 2
    if body_class == "ellipse":
        return z2, max((6 - b) / 4, 5 / 4), max((10 - b) / 6, 3 / 2)
    nu = min(1.0, (d - 1) / 2)
    z4 = max((3 * d - b) / 4, (3 * d - nu) / 4)
    z6 = max((10 - b) / 6, 8 / 5) if d == 2 else None
    return z2, z4, z6


def interpolated_exponent(d: int, beta: float, body_class: str = "generic") -> CriticalExponent:
    """The same table rebuilt from the critical lines by convexity.

    The line ``Re z = (d+1)/2`` is placed between the L^4 and L^6 lines in the
    plane (between L^2 and L^4 when ``d >= 3``); ``p`` follows from
    ``1/p = (1 - theta)/p0 + theta/p1``.  The logarithmic power collects the
    endpoint logarithms weighted by ``1 - theta`` and ``theta``.
    """
    _check_class(d, beta, body_class)
    b = float(beta)
    z2, z4, z6 = critical_lines(d, b, body_class)
    target = (d + 1) / 2
    if d == 2:
        theta = (target - z4) / (z6 - z4)
        p = 1 / ((1 - theta) / 4 + theta / 6)
        if body_class == "ellipse":
            e4 = 1 if _eq(b, 1) else 0
            w6 = 4 if _eq(b, 1) else 3 if b > 1 else 1 if _eq(b, 0.4) else 0
        else:
            e4 = eta(2, z4, b)
            w6 = 1 if _eq(b, 0.4) else 0
        lp = 1 / p + e4 * (1 - theta) / 4 + w6 * theta / 6
    else:
        theta = (target - z2) / (z4 - z2)
        p = 1 / ((1 - theta) / 2 + theta / 4)
        lp = 1 / p + eta(d, z4, b) * theta / 4
    return CriticalExponent(int(d), b, body_class, float(p), float(lp))


@dataclass(frozen=True)
class Resolution:
    """Discretization of the norm.

    ``grid`` is the x-grid size (``None``: 256 in the plane, 64 otherwise, and
    the Nyquist size for the spectral method).  ``delta`` overrides the
    spectral smoothing scale.
    """

    grid: int | None = None
    r_budget: int = 32
    method: str = "exact"
    delta: float | None = None

    def __post_init__(self):
        if self.method not in ("exact", "spectral"):
            raise DomainError("method must be 'exact' or 'spectral'")
        if self.r_budget < 1:
            raise DomainError("r_budget must be >= 1")


def _default_grid(d: int) -> int:
    return 256 if d == 2 else 64


def grid_pmean(field: np.ndarray, p: float) -> float:
    """``mean |field|^p`` over the grid (the p-th power, not its root)."""
    return float(np.mean(np.abs(field) ** p))


def _exact_field(body: ConvexBody, r: float, M: int) -> np.ndarray:
    counts = count_grid(body, r, M)
    return (counts - r**body.dim * volume(body)) * r ** (-(body.dim - 1) / 2)


class _SpectralField:
    """Normalized spectral field for a fixed smoothing scale."""

    def __init__(self, body: ConvexBody, delta: float, grid: int | None, workers=None):
        self.body = body
        self.workers = workers
        d = body.dim
        if isinstance(body, Ellipsoid):
            self.delta, self.moll, self.table = mollify._plan(
                body, delta, mollify.make_mollifier(body), grid, (d + 1) / 2
            )
            self.series = None
        else:
            self.series = mollify.build_series(body, delta, (d + 1) / 2, 0, grid=grid)

    def __call__(self, r: float) -> np.ndarray:
        d = self.body.dim
        if self.series is not None:
            return mollify.phi_family(self.series, r, self.workers).real
        coef = mollify.mollified_coefficients(self.body, self.delta, r, self.table, self.moll)
        return mollify._synthesize(self.table, coef, self.workers).real * r ** (-(d - 1) / 2)


def _inner(body, r, p_list, resolution: Resolution, spectral):
    if resolution.method == "exact":
        field_ = _exact_field(body, r, resolution.grid or _default_grid(body.dim))
    else:
        field_ = spectral(r)
    return [grid_pmean(field_, p) for p in p_list]


def estimate_norms(body: ConvexBody, mu: MeasureSpec, p_list, R: float,
                   resolution: Resolution | None = None, workers: int = 1) -> list[float]:
    """``I(p, R)`` for several ``p`` sharing the same fields."""
    resolution = resolution or Resolution()
    p_list = [float(p) for p in p_list]
    if any(not p >= 1 for p in p_list):
        raise DomainError("p must be >= 1")
    R = float(R)
    if not R >= 2:
        raise DomainError("R must be >= 2")
    nodes = quadrature_nodes(mu, R, resolution.r_budget)
    total = math.fsum(w for _, w in nodes)
    spectral = None
    if resolution.method == "spectral":
        delta = resolution.delta or R ** (-(body.dim - 1) / 2)
        spectral = _SpectralField(body, delta, resolution.grid)

    def job(node):
        return _inner(body, node[0], p_list, resolution, spectral)

    if workers > 1 and len(nodes) > 1:
        with ThreadPoolExecutor(workers) as ex:
            means = list(ex.map(job, nodes))
    else:
        means = [job(n) for n in nodes]
    out = []
    for k, p in enumerate(p_list):
        acc = math.fsum((w / total) * m[k] for (_, w), m in zip(nodes, means))
        out.append(acc ** (1 / p))
    return out


def estimate_norm(body: ConvexBody, mu: MeasureSpec, p: float, R: float,
                  resolution: Resolution | None = None, workers: int = 1) -> float:
    """``I(d, body, mu, p, R)``."""
    return estimate_norms(body, mu, [p], R, resolution, workers)[0]


@dataclass(frozen=True)
class GrowthFit:
    """Comparison of ``I^p = const`` against ``I^p = a + b log R``.

    ``kappa_hat`` is the slope of ``log I`` against ``log log R``.
    """

    model: str
    kappa_hat: float
    residual: float
    a: float
    b: float
    b_se: float
    const_residual: float
    log_residual: float
    spread: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class NormScanResult:
    p: float
    measure: str
    R: tuple[float, ...]
    I: tuple[float, ...]
    fit: GrowthFit

    def to_dict(self) -> dict:
        return {"p": self.p, "measure": self.measure, "R": list(self.R), "I": list(self.I),
                "fit": self.fit.to_dict()}


def geometric_ladder(R_min: float, R_max: float, points: int) -> np.ndarray:
    return np.geomspace(float(R_min), float(R_max), int(points))


def _growth_fit(R: np.ndarray, I: np.ndarray, p: float) -> GrowthFit:
    y = I**p
    L = np.log(R)
    lin = fit_line(L, y)
    const_res = float(np.std(y, ddof=1))
    kappa = fit_line(np.log(L), np.log(I)).slope
    t = lin.slope / lin.slope_se if lin.slope_se > 0 else math.inf
    prefer_log = lin.slope > 0 and t >= 2 and lin.residual < const_res
    return GrowthFit(
        model="log" if prefer_log else "bounded",
        kappa_hat=float(kappa),
        residual=float(lin.residual if prefer_log else const_res),
        a=lin.intercept,
        b=lin.slope,
        b_se=lin.slope_se,
        const_residual=const_res,
        log_residual=lin.residual,
        spread=float(I.max() / I.min()) if I.min() > 0 else math.inf,
    )


def _check_ladder(R: np.ndarray) -> None:
    if R.size < 8:
        raise DomainError("the ladder needs at least 8 points")
    if np.any(np.diff(R) <= 0):
        raise DomainError("the ladder must be strictly increasing")
    if R[0] < 10 or R[-1] > 1e4:
        raise DomainError("the ladder must lie in [10, 1e4]")


def scan_norms(body: ConvexBody, mu: MeasureSpec, p_list, ladder,
               resolution: Resolution | None = None, workers: int = 1) -> np.ndarray:
    """``I(p, R)`` for every ``p`` and ladder point; shape ``(len(p_list), len(ladder))``."""
    R = np.asarray(ladder, dtype=float)
    _check_ladder(R)

    def job(Rk):
        return estimate_norms(body, mu, p_list, Rk, resolution)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            vals = list(ex.map(job, R))
    else:
        vals = [job(Rk) for Rk in R]
    return np.asarray(vals).T


def growth_report(p: float, measure: str, R, I) -> NormScanResult:
    """Growth classification of a computed scan."""
    R = np.asarray(R, dtype=float)
    I = np.asarray(I, dtype=float)
    return NormScanResult(float(p), measure, tuple(R.tolist()), tuple(I.tolist()),
                          _growth_fit(R, I, float(p)))


def scan_growth(body: ConvexBody, mu: MeasureSpec, p: float, ladder,
                resolution: Resolution | None = None, workers: int = 1) -> NormScanResult:
    """``I(p, R)`` along a ladder of ``R`` with the growth classification.

    The log model is preferred when its slope is positive, at least two
    standard errors from zero and it fits better than a constant.
    """
    I = scan_norms(body, mu, [p], ladder, resolution, workers)[0]
    return growth_report(p, mu.label(), ladder, I)
