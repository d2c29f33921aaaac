"""Averaging measures on [0, 1] with their Fourier transforms and quadrature rules.

Convention: ``mu_hat(xi) = int exp(-2 pi i xi r) dmu(r)``.  All kinds have
mass one.  The power measure is ``(1 - alpha) r^{-alpha} dr``, and the
smooth bump is ``exp(-1 / (1 - (2r - 1)^2))`` divided by its mass.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import gamma, roots_jacobi, roots_laguerre

from .errors import DomainError, UnconvergedError
from .fitting import LineFit, loglog_slope

__all__ = [
    "MeasureSpec",
    "Dirac",
    "Uniform",
    "Power",
    "SmoothBump",
    "measure_fourier",
    "fit_beta",
    "quadrature_nodes",
    "measure_from_dict",
    "load_measure",
    "BetaFit",
]

_GL_NODES = 20
_QUAD_TOL = 1e-12
_LAGUERRE_NODES = 60


@dataclass(frozen=True)
class MeasureSpec:
    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ("dirac", "uniform", "power", "bump"):
            raise DomainError(f"unknown measure kind {self.kind!r}")
        if self.kind == "power":
            if self.alpha is None or not (0 < self.alpha < 1):
                raise DomainError("power measure needs 0 < alpha < 1")
        elif self.alpha is not None:
            raise DomainError("alpha applies only to the power measure")

    @property
    def beta(self) -> float:
        """Decay exponent of ``mu_hat`` (infinite for the smooth bump)."""
        return {"dirac": 0.0, "uniform": 1.0, "bump": math.inf}.get(
            self.kind, 1.0 - (self.alpha or 0.0)
        )

    @property
    def support_length(self) -> float:
        return 0.0 if self.kind == "dirac" else 1.0

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        return d

    def label(self) -> str:
        return self.kind if self.alpha is None else f"{self.kind}({self.alpha:g})"


def Dirac() -> MeasureSpec:
    return MeasureSpec("dirac")


def Uniform() -> MeasureSpec:
    return MeasureSpec("uniform")


def Power(alpha: float) -> MeasureSpec:
    return MeasureSpec("power", float(alpha))


def SmoothBump() -> MeasureSpec:
    return MeasureSpec("bump")


def _bump(r: np.ndarray) -> np.ndarray:
    t = 2 * np.asarray(r, dtype=float) - 1
    out = np.zeros_like(t)
    m = np.abs(t) < 1
    out[m] = np.exp(-1.0 / (1.0 - t[m] ** 2))
    return out


@lru_cache(maxsize=1)
def _bump_mass() -> float:
    x, w = np.polynomial.legendre.leggauss(200)
    return float(np.sum(0.5 * w * _bump(0.5 * (x + 1))))


def _panel_rule(n_panels: int, graded: bool):
    """Composite Gauss-Legendre nodes on [0, 1]; optional geometric grading at 0."""
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    if graded:
        first = edges[1]
        extra = first * 2.0 ** -np.arange(40, 0, -1)
        edges = np.concatenate([[0.0], extra, edges[1:]])
    a, b = edges[:-1], edges[1:]
    nodes = (0.5 * (b - a)[:, None] * (x + 1) + a[:, None]).ravel()
    weights = (0.5 * (b - a)[:, None] * w).ravel()
    return nodes, weights


def _oscillatory(xi: np.ndarray, alpha: float, factor: int) -> np.ndarray:
    """Composite rule for ``int_0^1 exp(-2 pi i xi s^p) ds``, ``p = 1 / (1 - alpha)``.

    This is the power transform after the substitution ``s = r^{1 - alpha}``;
    panels are scaled with ``|xi|`` and graded geometrically towards 0.
    """
    out = np.empty(xi.shape, dtype=complex)
    order = np.argsort(np.abs(xi))
    p = 1.0 / (1.0 - alpha)
    for s in range(0, xi.size, 64):
        idx = order[s : s + 64]
        xs = xi[idx]
        n_panels = factor * (int(math.ceil(np.max(np.abs(xs)) * p)) + 4)
        nodes, weights = _panel_rule(n_panels, graded=True)
        # the substitution absorbs the density
        out[idx] = np.exp(-2j * np.pi * np.outer(xs, nodes**p)) @ weights
    return out


def _power_contour(xi: np.ndarray, alpha: float) -> np.ndarray:
    """Power-measure transform for ``xi >= 1`` by steepest descent.

    ``int_0^1 = int_0^inf - int_1^inf``.  The first piece is
    ``Gamma(1 - a) (i w)^{a-1}``.  The second is rotated onto
    ``r = 1 - i t / w``, where it becomes a Gauss-Laguerre integral.
    """
    w = 2 * np.pi * xi
    t, wt = roots_laguerre(_LAGUERRE_NODES)
    tail = (-1j / w) * np.exp(-1j * w) * (
        (1 - 1j * t[None, :] / w[:, None]) ** (-alpha) @ wt
    )
    return (1 - alpha) * (gamma(1 - alpha) * (1j * w) ** (alpha - 1) - tail)


def _bump_trapezoid(xi: np.ndarray, factor: int) -> np.ndarray:
    """Trapezoid rule for the bump transform.

    The density is smooth with all derivatives vanishing at the ends, so the
    rule converges spectrally; aliasing enters only through the transform at
    ``n - xi``, which is negligible for ``n >= 4 |xi| + 1024``.
    """
    n = factor * (1024 + 4 * int(math.ceil(np.max(np.abs(xi)) if xi.size else 0)))
    r = np.arange(1, n) / n
    w = _bump(r) / (_bump_mass() * n)
    out = np.empty(xi.shape, dtype=complex)
    for s in range(0, xi.size, 256):
        out[s : s + 256] = np.exp(-2j * np.pi * np.outer(xi[s : s + 256], r)) @ w
    return out


def _by_quadrature(flat: np.ndarray, mu: MeasureSpec) -> np.ndarray:
    if mu.kind == "bump":
        a, b = _bump_trapezoid(flat, 1), _bump_trapezoid(flat, 2)
    else:
        a = _oscillatory(flat, float(mu.alpha), 2)
        b = _oscillatory(flat, float(mu.alpha), 4)
    err = float(np.max(np.abs(a - b))) if flat.size else 0.0
    if err > _QUAD_TOL:
        raise UnconvergedError(f"measure transform unconverged (change {err:.2e})", estimate=b)
    return b


def measure_fourier(mu: MeasureSpec, xi):
    """``mu_hat(xi)``; vectorized over ``xi``."""
    xi = np.asarray(xi, dtype=float)
    if mu.kind == "dirac":
        out = np.ones(xi.shape, dtype=complex)
    elif mu.kind == "uniform":
        out = np.exp(-1j * np.pi * xi) * np.sinc(xi)
    else:
        flat = np.abs(xi.ravel())
        res = np.empty(flat.shape, dtype=complex)
        far = (flat >= 1.0) if mu.kind == "power" else np.zeros(flat.shape, bool)
        if np.any(far):
            res[far] = _power_contour(flat[far], float(mu.alpha))
        if np.any(~far):
            res[~far] = _by_quadrature(flat[~far], mu)
        res = np.where(xi.ravel() < 0, np.conj(res), res)
        out = res.reshape(xi.shape)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class BetaFit:
    beta_hat: float
    C_hat: float
    fit: LineFit
    blocks: int


def fit_beta(mu: MeasureSpec, xi_max: float, *, density: float = 8.0,
             floor: float = 1e-13) -> BetaFit:
    """Decay exponent from the upper envelope of ``|mu_hat|`` over dyadic blocks.

    Each block ``[2^k, 2^{k+1})`` inside ``[2, xi_max]`` is sampled at about
    ``density`` points per unit with an irrational offset.  The block
    maximum and its location enter a log-log fit.  Sampling stops at the
    first block whose maximum falls below ``floor`` (rounding noise).
    """
    if not xi_max >= 100:
        raise DomainError("xi_max must be at least 100")
    px, py = [], []
    k = 1
    while 2.0**k < xi_max:
        lo, hi = 2.0**k, min(2.0 ** (k + 1), xi_max)
        n = max(16, int(density * (hi - lo)))
        xs = lo + (np.arange(n) + 0.5 * (math.sqrt(5) - 1)) * (hi - lo) / n
        v = np.abs(measure_fourier(mu, xs))
        i = int(np.argmax(v))
        k += 1
        if v[i] <= floor:
            break  # the envelope decays; later blocks are rounding noise
        px.append(xs[i])
        py.append(v[i])
    if len(px) < 2:
        raise DomainError("degenerate decay fit: fewer than two blocks above the noise floor")
    fit = loglog_slope(px, py)
    beta = -fit.slope
    C_hat = float(np.max(np.asarray(py) * (1 + np.asarray(px)) ** beta))
    return BetaFit(beta, C_hat, fit, len(px))


def quadrature_nodes(mu: MeasureSpec, R: float, budget: int = 32) -> list[tuple[float, float]]:
    """Nodes and weights for ``int f(r) dmu(r - R)``."""
    budget = int(budget)
    if budget < 1:
        raise DomainError("budget must be at least 1")
    if mu.kind == "dirac":
        return [(float(R), 1.0)]
    if mu.kind == "uniform":
        x, w = np.polynomial.legendre.leggauss(budget)
        r, wt = 0.5 * (x + 1), 0.5 * w
    elif mu.kind == "power":
        a = float(mu.alpha)
        x, w = roots_jacobi(budget, 0.0, -a)
        # int_0^1 f(r) r^{-a} dr = 2^{a-1} sum w_i f((1 + x_i) / 2)
        r, wt = 0.5 * (x + 1), (1 - a) * 2.0 ** (a - 1) * w
    else:
        x, w = np.polynomial.legendre.leggauss(budget)
        r = 0.5 * (x + 1)
        wt = 0.5 * w * _bump(r) / _bump_mass()
    return [(float(R + ri), float(wi)) for ri, wi in zip(r, wt)]


def measure_from_dict(cfg: dict) -> MeasureSpec:
    try:
        kind = cfg["kind"]
        alpha = cfg.get("alpha")
        return MeasureSpec(kind, None if alpha is None else float(alpha))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed measure description: {exc}") from exc


def load_measure(path) -> MeasureSpec:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read measure file {path}: {exc}") from exc
    return measure_from_dict(cfg)
