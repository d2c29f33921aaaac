"""Exact lattice point counts in dilated and translated convex bodies.

Counting proceeds row by row: integer prefixes ``(k_1, ..., k_{d-1})`` run
over the bounding box, and the admissible last coordinates form an interval
by convexity.  The interval endpoints come from :meth:`ConvexBody.chord`; a
guard then re-tests the integers next to each endpoint with exactly the
same membership predicate that the brute-force oracle uses, so both routes
agree bit for bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .bodies import ConvexBody
from .errors import DomainError

__all__ = [
    "DiscrepancySample",
    "volume",
    "count_lattice",
    "brute_force_count",
    "discrepancy",
    "count_grid",
]

_ROW_CHUNK = 1 << 18


@dataclass(frozen=True)
class DiscrepancySample:
    r: float
    x: tuple[float, ...]
    count: int
    volume_term: float
    D: float


def volume(body: ConvexBody) -> float:
    """Lebesgue measure of the body."""
    return float(body.volume())


def _check_r(r: float) -> float:
    r = float(r)
    if not (r > 0 and math.isfinite(r)):
        raise DomainError("r must be positive and finite")
    return r


def _check_x(body: ConvexBody, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (body.dim,) or not np.all(np.isfinite(x)):
        raise DomainError(f"x must be a finite {body.dim}-vector")
    return x


def _member(body, r, pre, last):
    pts = np.concatenate([pre, last[:, None]], axis=1)
    return body.gauge(pts) <= r


def _guarded_range(body, r, pre, lo, hi, shift, scale=1.0):
    """Integer range ``[k_lo, k_hi]`` of admissible last coordinates.

    The last coordinate of the tested point is ``k * scale + shift`` when
    ``scale == 1`` and ``k / scale`` otherwise (fine-lattice mode).
    """

    def point(k):
        return k + shift if scale == 1.0 else k / scale

    empty = ~(lo <= hi)
    lo_f = np.where(empty, 0.0, lo)
    hi_f = np.where(empty, 0.0, hi)
    if scale == 1.0:
        k_lo = np.ceil(lo_f - shift)
        k_hi = np.floor(hi_f - shift)
    else:
        k_lo = np.ceil(lo_f * scale)
        k_hi = np.floor(hi_f * scale)
    # near-tangent rows declared empty still get their nearest integer tested
    if np.any(empty):
        k_lo = np.where(empty, 0.0, k_lo)
        k_hi = np.where(empty, -1.0, k_hi)

    for _ in range(4):
        grow = _member(body, r, pre, point(k_lo - 1)) & ~empty
        if not np.any(grow):
            break
        k_lo = np.where(grow, k_lo - 1, k_lo)
    for _ in range(4):
        test = (k_lo <= k_hi) & ~_member(body, r, pre, point(k_lo))
        if not np.any(test):
            break
        k_lo = np.where(test, k_lo + 1, k_lo)
    for _ in range(4):
        grow = _member(body, r, pre, point(k_hi + 1)) & ~empty
        if not np.any(grow):
            break
        k_hi = np.where(grow, k_hi + 1, k_hi)
    for _ in range(4):
        test = (k_lo <= k_hi) & ~_member(body, r, pre, point(k_hi))
        if not np.any(test):
            break
        k_hi = np.where(test, k_hi - 1, k_hi)
    return k_lo.astype(np.int64), k_hi.astype(np.int64)


def _prefix_ranges(body: ConvexBody, r: float, x: np.ndarray, scale: float = 1.0):
    ranges = []
    for i in range(body.dim - 1):
        lo = -r * body.axis_extent[i, 0]
        hi = r * body.axis_extent[i, 1]
        if scale == 1.0:
            ranges.append(np.arange(math.floor(lo - x[i]) - 1, math.ceil(hi - x[i]) + 2))
        else:
            ranges.append(np.arange(math.floor(lo * scale) - 1, math.ceil(hi * scale) + 2))
    return ranges


def _iter_prefix_chunks(ranges):
    if len(ranges) == 1:
        k = ranges[0]
        for s in range(0, k.size, _ROW_CHUNK):
            yield k[s : s + _ROW_CHUNK, None]
        return
    grids = np.meshgrid(*ranges, indexing="ij")
    flat = np.stack([g.reshape(-1) for g in grids], axis=1)
    for s in range(0, flat.shape[0], _ROW_CHUNK):
        yield flat[s : s + _ROW_CHUNK]


def count_lattice(body: ConvexBody, r: float, x) -> int:
    """``#{k in Z^d : gauge(k + x) <= r}``, the lattice points of ``r * body - x``."""
    r = _check_r(r)
    x = _check_x(body, x)
    total = 0
    for kp in _iter_prefix_chunks(_prefix_ranges(body, r, x)):
        pre = kp + x[:-1]
        lo, hi = body.chord(pre, r)
        k_lo, k_hi = _guarded_range(body, r, pre, lo, hi, x[-1])
        total += int(np.sum(np.maximum(k_hi - k_lo + 1, 0)))
    return total


def brute_force_count(body: ConvexBody, r: float, x) -> int:
    """Reference count by testing every integer point of the bounding box."""
    r = _check_r(r)
    x = _check_x(body, x)
    axes = []
    for i in range(body.dim):
        lo = -r * body.axis_extent[i, 0] - x[i]
        hi = r * body.axis_extent[i, 1] - x[i]
        axes.append(np.arange(math.floor(lo) - 1, math.ceil(hi) + 2))
    total = 0
    head = list(itertools.product(*axes[:-1]))
    last = axes[-1].astype(float)
    for s in range(0, len(head), 4096):
        block = np.asarray(head[s : s + 4096], dtype=float)
        pre = np.repeat(block + x[:-1], last.size, axis=0)
        tail = np.tile(last, block.shape[0]) + x[-1]
        pts = np.concatenate([pre, tail[:, None]], axis=1)
        total += int(np.count_nonzero(body.gauge(pts) <= r))
    return total


def discrepancy(body: ConvexBody, r: float, x) -> DiscrepancySample:
    """Exact discrepancy ``count - r^d |body|`` at dilation ``r`` and shift ``x``."""
    r = _check_r(r)
    xv = _check_x(body, x)
    count = count_lattice(body, r, xv)
    vol = r**body.dim * volume(body)
    return DiscrepancySample(r, tuple(float(t) for t in xv), count, vol, count - vol)


def count_grid(body: ConvexBody, r: float, M: int) -> np.ndarray:
    """Counts at every shift ``x = j / M``, returned as an array of shape ``(M,)*d``.

    Uses ``count(j/M) = #{m = j (mod M) : m / M in r * body}``: each row of
    the fine lattice ``Z^d / M`` contributes a cyclic run of residues, which
    is accumulated with difference arrays.  ``M`` must be a power of two so
    that ``m / M`` and ``k + j / M`` are the same floating-point number.
    """
    r = _check_r(r)
    M = int(M)
    if M < 1 or M & (M - 1):
        raise DomainError("grid size must be a power of two")
    d = body.dim
    Mf = float(M)
    rows = M ** (d - 1)
    diff = np.zeros(rows * (M + 1), dtype=np.int64)
    full = np.zeros(rows, dtype=np.int64)
    strides = M ** np.arange(d - 2, -1, -1)
    for mp in _iter_prefix_chunks(_prefix_ranges(body, r, np.zeros(d), scale=Mf)):
        pre = mp / Mf
        lo, hi = body.chord(pre, r)
        m_lo, m_hi = _guarded_range(body, r, pre, lo, hi, 0.0, scale=Mf)
        length = m_hi - m_lo + 1
        keep = length > 0
        if not np.any(keep):
            continue
        m_lo, length = m_lo[keep], length[keep]
        row = (np.mod(mp[keep].astype(np.int64), M) * strides).sum(axis=1)
        np.add.at(full, row, length // M)
        part = length % M
        start = np.mod(m_lo, M)
        end = start + part
        base = row * (M + 1)
        wrap = end > M
        np.add.at(diff, base + start, 1)
        np.add.at(diff, base + np.where(wrap, M, end), -1)
        if np.any(wrap):
            np.add.at(diff, base[wrap], 1)
            np.add.at(diff, base[wrap] + end[wrap] - M, -1)
    counts = np.cumsum(diff.reshape(rows, M + 1), axis=1)[:, :M] + full[:, None]
    return counts.reshape((M,) * d)
