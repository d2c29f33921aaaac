"""Small regression helpers for decay and growth fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    slope_se: float
    residual: float


def fit_line(x, y) -> LineFit:
    """Ordinary least squares ``y = intercept + slope * x`` with the slope's standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise DomainError("need at least two points to fit a line")
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    dof = max(x.size - 2, 1)
    s2 = float(res @ res) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    return LineFit(float(coef[1]), float(coef[0]), float(np.sqrt(cov[1, 1])), float(np.sqrt(s2)))


def loglog_slope(x, y) -> LineFit:
    """Fit of ``log y`` against ``log x``."""
    return fit_line(np.log(x), np.log(y))


def envelope_slope(x, y, blocks: int = 8, floor: float = 0.0) -> LineFit:
    """Log-log slope of the upper envelope of ``|y|``.

    ``x`` is split into ``blocks`` geometric blocks.  Each block contributes
    its maximum, located at its arg-max, which makes the fit insensitive to
    zeros of oscillating data.  Blocks whose maximum does not exceed
    ``floor`` are dropped.
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y))
    edges = np.geomspace(x.min(), x.max() * (1 + 1e-12), blocks + 1)
    px, py = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (x >= lo) & (x < hi)
        if not np.any(sel):
            continue
        i = np.argmax(np.where(sel, y, -np.inf))
        if y[i] > floor:
            px.append(x[i])
            py.append(y[i])
    if len(px) < 2:
        raise DomainError("envelope fit is degenerate (fewer than two usable blocks)")
    return loglog_slope(px, py)
