"""Smooth strictly convex bodies containing the origin.

Three families are provided: :class:`Ball`, :class:`Ellipsoid` (the image of
the unit ball under a matrix ``M``) and :class:`PerturbedBall` (a star body
with a trigonometric radial perturbation).  All methods are vectorized over
the leading axes of their array arguments; the trailing axis holds the
coordinates.

Support function, boundary point with prescribed normal, support Hessian
and Gaussian curvature are exact for balls and ellipsoids.  For perturbed
balls they come from a Newton maximization of ``x . y`` over the boundary,
in a local tangent chart, with derivatives obtained by complex-step
differentiation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from scipy.special import comb

from .errors import DomainError, UnconvergedError

__all__ = [
    "ConvexBody",
    "Ball",
    "Ellipsoid",
    "PerturbedBall",
    "Mode",
    "BoundaryPoint",
    "support",
    "support_gradient",
    "gauge",
    "support_bounds",
    "curvature_at_normal",
    "body_from_dict",
    "load_body",
    "unit_ball_volume",
]

_CS_STEP = 1e-30  # complex-step increment
_FD_STEP = 1e-5  # central-difference increment for second derivatives
_NEWTON_TOL = 1e-12
_NEWTON_ITERS = 30
_N_STARTS = 8


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _as_points(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (d,):
        raise DomainError(f"expected trailing dimension {d}, got shape {x.shape}")
    return x


def _norm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=-1))


def tangent_basis(u: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the tangent space ``u^perp``, shape ``(..., d, d-1)``."""
    u = np.asarray(u, dtype=float)
    d = u.shape[-1]
    if d == 2:
        return np.stack([-u[..., 1], u[..., 0]], axis=-1)[..., None]
    if d == 3:
        axis = np.argmin(np.abs(u), axis=-1)
        e = np.zeros_like(u)
        np.put_along_axis(e, axis[..., None], 1.0, axis=-1)
        e1 = e - np.sum(e * u, axis=-1, keepdims=True) * u
        e1 /= _norm(e1)[..., None]
        e2 = np.cross(u, e1)
        return np.stack([e1, e2], axis=-1)
    flat = u.reshape(-1, d)
    out = np.empty((flat.shape[0], d, d - 1))
    for i, v in enumerate(flat):
        q, _ = np.linalg.qr(np.column_stack([v, np.eye(d)]))
        out[i] = q[:, 1:d]
    return out.reshape(u.shape + (d - 1,))


def _tangential_eigenvalues(hess: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Eigenvalues of a support Hessian restricted to ``u^perp`` (curvature radii)."""
    E = tangent_basis(u)
    S = np.einsum("...ia,...ij,...jb->...ab", E, hess, E)
    return np.linalg.eigvalsh(0.5 * (S + np.swapaxes(S, -1, -2)))


@dataclass(frozen=True)
class BoundaryPoint:
    """Boundary point ``z(x)`` with its outer unit normal and Gaussian curvature."""

    point: np.ndarray
    normal: np.ndarray
    curvature: float


class ConvexBody:
    """Common interface.  Subclasses set ``dim`` and ``kind``."""

    dim: int
    kind: str

    # -- interface -----------------------------------------------------
    def support(self, x) -> np.ndarray:
        raise NotImplementedError

    def gauge(self, x) -> np.ndarray:
        raise NotImplementedError

    def boundary_point(self, x) -> np.ndarray:
        """``z(x) = grad g(x)``, the boundary point with outer normal ``x``."""
        raise NotImplementedError

    def support_hessian(self, x) -> np.ndarray:
        raise NotImplementedError

    def volume(self) -> float:
        raise NotImplementedError

    def support_bounds(self) -> tuple[float, float]:
        raise NotImplementedError

    def radius_bounds(self) -> tuple[float, float]:
        """Extreme curvature radii ``(c, C)`` over the boundary."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    # -- shared --------------------------------------------------------
    def curvature_radii(self, u) -> np.ndarray:
        u = _as_points(u, self.dim)
        u = u / _norm(u)[..., None]
        return _tangential_eigenvalues(self.support_hessian(u), u)

    def curvature(self, u) -> np.ndarray:
        """Gaussian curvature at the boundary point with outer normal ``u``."""
        return 1.0 / np.prod(self.curvature_radii(u), axis=-1)

    @cached_property
    def axis_extent(self) -> np.ndarray:
        """Rows ``(g(-e_i), g(e_i))``: the body lies in the product of ``[-g(-e_i), g(e_i)]``."""
        eye = np.eye(self.dim)
        return np.stack([self.support(-eye), self.support(eye)], axis=-1)

    def chord(self, prefix, r: float) -> tuple[np.ndarray, np.ndarray]:
        """Interval of the last coordinate ``t`` with ``gauge(prefix, t) <= r``.

        Returns ``(lo, hi)``; rows with an empty section get ``lo > hi``.
        The generic version minimizes the convex function ``t -> gauge``
        by golden section and bisects for the two crossings.
        """
        prefix = np.asarray(prefix, dtype=float)
        n = prefix.shape[0]
        lo_box = -r * self.axis_extent[-1, 0] * (1 + 1e-9) - 1e-12
        hi_box = r * self.axis_extent[-1, 1] * (1 + 1e-9) + 1e-12

        def h(t, pre=prefix):
            return self.gauge(np.concatenate([pre, t[:, None]], axis=1))

        a = np.full(n, lo_box)
        b = np.full(n, hi_box)
        inv_phi = (math.sqrt(5) - 1) / 2
        c = b - inv_phi * (b - a)
        e = a + inv_phi * (b - a)
        fc, fe = h(c), h(e)
        for _ in range(90):
            left = fc < fe
            b = np.where(left, e, b)
            a = np.where(left, a, c)
            new_c = b - inv_phi * (b - a)
            new_e = a + inv_phi * (b - a)
            c_next = np.where(left, new_c, e)
            e_next = np.where(left, c, new_e)
            f_new = h(np.where(left, new_c, new_e))
            fc, fe = np.where(left, f_new, fe), np.where(left, fc, f_new)
            c, e = c_next, e_next
        tmin = 0.5 * (a + b)
        inside = h(tmin) <= r * (1 + 1e-12)
        lo = np.full(n, np.inf)
        hi = np.full(n, -np.inf)
        if not np.any(inside):
            return lo, hi
        tm = tmin[inside]
        # lower crossing: gauge decreasing on [lo_box, tm]
        a = np.full(tm.shape, lo_box)
        b = tm.copy()
        for _ in range(80):
            m = 0.5 * (a + b)
            out = h(m, prefix[inside]) > r
            a = np.where(out, m, a)
            b = np.where(out, b, m)
        lo[inside] = b
        a = tm.copy()
        b = np.full(tm.shape, hi_box)
        for _ in range(80):
            m = 0.5 * (a + b)
            out = h(m, prefix[inside]) > r
            b = np.where(out, m, b)
            a = np.where(out, a, m)
        hi[inside] = a
        return lo, hi


class Ellipsoid(ConvexBody):
    """The image ``M B`` of the closed unit ball under a nonsingular matrix."""

    kind = "ellipsoid"

    def __init__(self, matrix):
        M = np.array(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 2:
            raise DomainError("ellipsoid matrix must be square with d >= 2")
        det = np.linalg.det(M)
        if not np.isfinite(det) or abs(det) < 1e-300:
            raise DomainError("ellipsoid matrix must be nonsingular")
        self.matrix = M
        self.dim = M.shape[0]
        self._Minv = np.linalg.inv(M)
        self._MMt = M @ M.T
        self._det = abs(det)
        self._sv = np.linalg.svd(M, compute_uv=False)

    def support(self, x):
        x = _as_points(x, self.dim)
        return _norm(x @ self.matrix)

    def gauge(self, x):
        x = _as_points(x, self.dim)
        return _norm(x @ self._Minv.T)

    def boundary_point(self, x):
        x = _as_points(x, self.dim)
        w = x @ self._MMt
        return w / self.support(x)[..., None]

    def support_hessian(self, x):
        x = _as_points(x, self.dim)
        g = self.support(x)[..., None, None]
        w = (x @ self._MMt)[..., :, None]
        return self._MMt / g - w * np.swapaxes(w, -1, -2) / g**3

    def curvature(self, u):
        u = _as_points(u, self.dim)
        u = u / _norm(u)[..., None]
        return self.support(u) ** (self.dim + 1) / self._det**2

    def volume(self):
        return self._det * unit_ball_volume(self.dim)

    def support_bounds(self):
        return float(self._sv[-1]), float(self._sv[0])

    def radius_bounds(self):
        s_min, s_max = float(self._sv[-1]), float(self._sv[0])
        return s_min**2 / s_max, s_max**2 / s_min

    def chord(self, prefix, r):
        prefix = np.asarray(prefix, dtype=float)
        c = self._Minv[:, -1]
        w = prefix @ self._Minv[:, :-1].T
        qa = c @ c
        qb = w @ c
        qc = np.sum(w * w, axis=1) - r * r
        disc = qb * qb - qa * qc
        # tolerate rounding at exact tangency; the caller's guard re-tests
        ok = disc >= -1e-12 * qa * r * r
        root = np.sqrt(np.where(ok, disc, 0.0))
        lo = np.where(ok, (-qb - root) / qa, np.inf)
        hi = np.where(ok, (-qb + root) / qa, -np.inf)
        return lo, hi

    def to_dict(self):
        return {"kind": "ellipsoid", "matrix": self.matrix.tolist()}

    def __repr__(self):
        return f"Ellipsoid({self.matrix.tolist()})"


class Ball(Ellipsoid):
    """Closed Euclidean ball of the given radius centred at the origin."""

    kind = "ball"

    def __init__(self, radius: float = 1.0, dim: int = 2):
        if not (radius > 0 and math.isfinite(radius)):
            raise DomainError("ball radius must be positive")
        if int(dim) != dim or dim < 2:
            raise DomainError("dimension must be an integer >= 2")
        self.radius = float(radius)
        super().__init__(self.radius * np.eye(int(dim)))

    def support(self, x):
        x = _as_points(x, self.dim)
        return self.radius * _norm(x)

    def gauge(self, x):
        x = _as_points(x, self.dim)
        return _norm(x) / self.radius

    def boundary_point(self, x):
        x = _as_points(x, self.dim)
        return self.radius * x / _norm(x)[..., None]

    def curvature(self, u):
        u = _as_points(u, self.dim)
        return np.full(u.shape[:-1], self.radius ** (1 - self.dim))

    def chord(self, prefix, r):
        prefix = np.asarray(prefix, dtype=float)
        rr = r * self.radius
        disc = rr * rr - np.sum(prefix * prefix, axis=1)
        ok = disc >= -1e-12 * rr * rr
        root = np.sqrt(np.where(ok, disc, 0.0))
        return np.where(ok, -root, np.inf), np.where(ok, root, -np.inf)

    def to_dict(self):
        d = {"kind": "ball", "radius": self.radius}
        if self.dim != 2:
            d["dim"] = self.dim
        return d

    def __repr__(self):
        return f"Ball(radius={self.radius}, dim={self.dim})"


# ----------------------------------------------------------------------
# perturbed balls
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Mode:
    """One perturbation term: ``freq`` is ``(k,)`` in the plane, ``(l, m)`` in space."""

    freq: tuple[int, ...]
    amp: float


def _planar_harmonic(u1, u2, k: int):
    """``Re((u1 + i u2)^k)`` written as a real polynomial (complex-step safe)."""
    out = np.zeros(np.broadcast(u1, u2).shape, dtype=np.result_type(u1, u2, float))
    for j in range(0, k + 1, 2):
        out = out + comb(k, j, exact=True) * (-1) ** (j // 2) * u1 ** (k - j) * u2**j
    return out


def _sphere_grid(d: int) -> np.ndarray:
    if d == 2:
        t = 2 * np.pi * np.arange(2048) / 2048
        return np.stack([np.cos(t), np.sin(t)], axis=-1)
    th = np.pi * (np.arange(64) + 0.5) / 64
    ph = 2 * np.pi * np.arange(128) / 128
    T, P = np.meshgrid(th, ph, indexing="ij")
    return np.stack(
        [np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1
    ).reshape(-1, 3)


class PerturbedBall(ConvexBody):
    """Star body with radial function ``rho0 (1 + q(u))`` on the unit sphere.

    In the plane a mode ``(k,)`` contributes ``amp cos(k theta)``.  In space a
    mode ``(l, m)`` contributes ``amp T_l(u3) Re((u1 + i u2)^m)``.  Both are
    polynomials in the Cartesian coordinates, so ``q`` is smooth.  Strict
    convexity is checked at construction on a sphere grid.
    """

    kind = "perturbed_ball"

    def __init__(self, rho0: float, modes: Sequence, dim: int | None = None):
        if not (rho0 > 0 and math.isfinite(rho0)):
            raise DomainError("rho0 must be positive")
        parsed = []
        for m in modes:
            if isinstance(m, Mode):
                parsed.append(m)
            elif isinstance(m, dict):
                parsed.append(Mode(tuple(int(f) for f in m["freq"]), float(m["amp"])))
            else:
                f, a = m
                parsed.append(Mode(tuple(int(v) for v in np.atleast_1d(f)), float(a)))
        lens = {len(m.freq) for m in parsed}
        if dim is None:
            if len(lens) != 1:
                raise DomainError("cannot infer dimension from the modes")
            dim = lens.pop() + 1
        if dim not in (2, 3) or any(len(m.freq) != dim - 1 for m in parsed):
            raise DomainError("perturbed balls need freq (k,) in d=2 or (l, m) in d=3")
        if any(f < 0 for m in parsed for f in m.freq):
            raise DomainError("frequencies must be nonnegative")
        self.rho0 = float(rho0)
        self.modes = tuple(parsed)
        self.dim = int(dim)
        self.amplitude_bound = float(sum(abs(m.amp) for m in parsed))
        if self.amplitude_bound >= 1:
            raise DomainError("amplitude bound must be < 1 for a positive radius")
        self._grid = _sphere_grid(self.dim)
        self._grid_points = self.radial(self._grid)[:, None] * self._grid
        K = self.surface_curvature(self._grid)
        if not np.all(np.isfinite(K)) or np.min(K) <= 0:
            raise DomainError("perturbation breaks strict convexity on the sphere grid")

    # -- radial description -------------------------------------------
    def perturbation(self, u):
        """``q(u)``; accepts complex arguments (used for complex-step derivatives)."""
        u = np.asarray(u)
        q = np.zeros(u.shape[:-1], dtype=np.result_type(u, float))
        for m in self.modes:
            if self.dim == 2:
                q = q + m.amp * _planar_harmonic(u[..., 0], u[..., 1], m.freq[0])
            else:
                l, k = m.freq
                coef = np.zeros(l + 1)
                coef[l] = 1.0
                q = q + m.amp * _cheb.chebval(u[..., 2], coef) * _planar_harmonic(
                    u[..., 0], u[..., 1], k
                )
        return q

    def radial(self, u):
        return self.rho0 * (1.0 + self.perturbation(u))

    def gauge(self, x):
        x = _as_points(x, self.dim)
        n = _norm(x)
        safe = np.where(n > 0, n, 1.0)
        return np.where(n > 0, n / self.radial(x / safe[..., None]), 0.0)

    def gauge_polar(self, x):
        """Gauge through polar duality ``sup_u (x . u) / g(u)``.

        Grid search followed by a local quasi-Newton refinement in a tangent
        chart.  Slower than :meth:`gauge`; kept as an independent route.
        """
        from scipy.optimize import minimize

        x = _as_points(x, self.dim)
        flat = x.reshape(-1, self.dim)
        out = np.zeros(flat.shape[0])
        gu = self._grid_support
        for i, xi in enumerate(flat):
            if not np.any(xi):
                continue
            u0 = self._grid[np.argmax((self._grid @ xi) / gu)]
            E = tangent_basis(u0[None])[0]

            def neg(a, xi=xi, u0=u0, E=E):
                w = u0 + E @ a
                w = w / np.linalg.norm(w)
                return -float(xi @ w) / float(self.support(w))

            res = minimize(neg, np.zeros(self.dim - 1), method="BFGS", options={"gtol": 1e-11})
            out[i] = -res.fun
        return out.reshape(x.shape[:-1])

    # -- chart machinery ------------------------------------------------
    def _chart(self, u0, E, a):
        w = u0 + np.einsum("nij,nj->ni", E, a)
        v = w / np.sqrt(np.sum(w * w, axis=-1))[:, None]
        return self.radial(v)[:, None] * v

    def _jacobian(self, u0, E, a):
        k = E.shape[-1]
        J = np.empty(u0.shape + (k,))
        for i in range(k):
            step = np.zeros(a.shape, dtype=complex)
            step[:, i] = 1j * _CS_STEP
            J[..., i] = np.imag(self._chart(u0, E, a + step)) / _CS_STEP
        return J

    def _local_derivatives(self, u0, E):
        """First and second derivatives of the chart map at ``a = 0``."""
        n, k = u0.shape[0], E.shape[-1]
        a0 = np.zeros((n, k))
        J = self._jacobian(u0, E, a0)
        Y2 = np.empty(u0.shape + (k, k))
        for j in range(k):
            s = np.zeros((n, k))
            s[:, j] = _FD_STEP
            Y2[..., j] = (self._jacobian(u0, E, s) - self._jacobian(u0, E, -s)) / (
                2 * _FD_STEP
            )
        Y2 = 0.5 * (Y2 + np.swapaxes(Y2, -1, -2))
        return J, Y2

    def surface_curvature(self, u):
        """Gaussian curvature at the radial boundary point ``rho(u) u``.

        Computed from the first and second fundamental forms of the radial
        parametrization; independent of the support-function route.
        """
        u = np.asarray(u, dtype=float).reshape(-1, self.dim)
        E = tangent_basis(u)
        J, Y2 = self._local_derivatives(u, E)
        if self.dim == 2:
            t = J[:, :, 0]
            nrm = np.stack([t[:, 1], -t[:, 0]], axis=-1)
        else:
            nrm = np.cross(J[:, :, 0], J[:, :, 1])
        y = self.radial(u)[:, None] * u
        nrm *= np.sign(np.sum(nrm * y, axis=-1))[:, None]
        nrm /= _norm(nrm)[:, None]
        second = -np.einsum("nd,ndij->nij", nrm, Y2)
        first = np.einsum("ndi,ndj->nij", J, J)
        return np.linalg.det(second) / np.linalg.det(first)

    def _newton(self, xhat, starts):
        """Maximize ``xhat . y`` over the boundary from the given start directions."""
        u = starts.copy()
        for _ in range(_NEWTON_ITERS):
            E = tangent_basis(u)
            J, Y2 = self._local_derivatives(u, E)
            grad = np.einsum("nd,ndi->ni", xhat, J)
            H = np.einsum("nd,ndij->nij", xhat, Y2)
            step = np.empty_like(grad)
            ev = np.linalg.eigvalsh(H)
            good = ev[:, -1] < 0
            if np.any(good):
                step[good] = -np.linalg.solve(H[good], grad[good][..., None])[..., 0]
            step[~good] = 0.1 * grad[~good]
            size = _norm(step)
            step *= np.minimum(1.0, 0.3 / np.maximum(size, 1e-300))[:, None]
            w = u + np.einsum("nij,nj->ni", E, step)
            u = w / _norm(w)[:, None]
            if np.max(size) < _NEWTON_TOL:
                return u
        if np.max(size) > 1e-9:
            raise UnconvergedError("support maximization did not converge", estimate=u)
        return u

    def _maximizer(self, x):
        """Boundary direction ``u*`` maximizing ``x . y``; ``x`` of shape ``(n, d)``."""
        xhat = x / _norm(x)[:, None]
        n = xhat.shape[0]
        starts = np.empty((n, _N_STARTS, self.dim))
        chunk = max(1, 2_000_000 // self._grid.shape[0])
        for s in range(0, n, chunk):
            scores = xhat[s : s + chunk] @ self._grid_points.T
            idx = np.argpartition(-scores, _N_STARTS - 1, axis=1)[:, :_N_STARTS]
            starts[s : s + chunk] = self._grid[idx]
        rep = np.repeat(xhat, _N_STARTS, axis=0)
        u = self._newton(rep, starts.reshape(-1, self.dim))
        vals = np.sum(rep * self.radial(u)[:, None] * u, axis=1).reshape(n, _N_STARTS)
        best = np.argmax(vals, axis=1)
        return u.reshape(n, _N_STARTS, self.dim)[np.arange(n), best]

    def _normal_at_direction(self, v):
        """Outer unit normal at the radial boundary point ``rho(v) v``."""
        E = tangent_basis(v)
        J = self._jacobian(v, E, np.zeros((v.shape[0], self.dim - 1)))
        if self.dim == 2:
            t = J[:, :, 0]
            nrm = np.stack([t[:, 1], -t[:, 0]], axis=-1)
        else:
            nrm = np.cross(J[:, :, 0], J[:, :, 1])
        nrm *= np.sign(np.sum(nrm * v, axis=-1))[:, None]
        return nrm / _norm(nrm)[:, None]

    # -- support function ------------------------------------------------
    def boundary_point(self, x):
        x = _as_points(x, self.dim)
        flat = x.reshape(-1, self.dim)
        nz = _norm(flat) > 0
        out = np.full(flat.shape, np.nan)
        if np.any(nz):
            u = self._maximizer(flat[nz])
            out[nz] = self.radial(u)[:, None] * u
        return out.reshape(x.shape)

    def support(self, x):
        x = _as_points(x, self.dim)
        z = self.boundary_point(x)
        return np.where(_norm(x) > 0, np.sum(np.nan_to_num(z) * x, axis=-1), 0.0)

    def support_hessian(self, x):
        """``-J H^{-1} J^T / |x|`` with ``J`` the chart Jacobian at the maximizer."""
        x = _as_points(x, self.dim)
        flat = x.reshape(-1, self.dim)
        nrm = _norm(flat)
        xhat = flat / nrm[:, None]
        u = self._maximizer(flat)
        E = tangent_basis(u)
        J, Y2 = self._local_derivatives(u, E)
        H = np.einsum("nd,ndij->nij", xhat, Y2)
        Hinv = np.linalg.inv(H)
        out = -np.einsum("nai,nij,nbj->nab", J, Hinv, J) / nrm[:, None, None]
        return out.reshape(x.shape + (self.dim,))

    @cached_property
    def _angle_tables(self):
        from scipy.interpolate import CubicSpline

        n = 4096
        th = 2 * np.pi * np.arange(n + 1) / n
        U = np.stack([np.cos(th[:-1]), np.sin(th[:-1])], axis=-1)
        g = self.support(U)
        K = self.curvature(U)
        gs = CubicSpline(th, np.append(g, g[0]), bc_type="periodic")
        ks = CubicSpline(th, np.append(K, K[0]), bc_type="periodic")
        return gs, ks

    def direction_table(self, u):
        """``(g(u), K(u))`` at unit vectors from periodic splines on 4096 normals (d=2).

        Meant for bulk evaluation at many directions; interpolation error is
        about 1e-12 for the amplitudes accepted at construction.
        """
        if self.dim != 2:
            raise DomainError("direction tables exist only in the plane")
        u = np.asarray(u, dtype=float)
        th = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2 * np.pi)
        gs, ks = self._angle_tables
        return gs(th), ks(th)

    @cached_property
    def _grid_support(self) -> np.ndarray:
        return self.support(self._grid)

    def support_bounds(self):
        g = self._grid_support
        return float(np.min(g)), float(np.max(g))

    @cached_property
    def _radius_bounds(self) -> tuple[float, float]:
        radii = self.curvature_radii(self._grid)
        lo, hi = float(np.min(radii)), float(np.max(radii))
        if self.dim == 2:
            # refine the extreme radii in the normal angle by golden section
            from scipy.optimize import minimize_scalar

            th = np.arctan2(self._grid[:, 1], self._grid[:, 0])
            step = 2 * np.pi / self._grid.shape[0]

            def rad(t):
                return float(self.curvature_radii(np.array([[np.cos(t), np.sin(t)]]))[0, 0])

            i_lo, i_hi = int(np.argmin(radii[:, 0])), int(np.argmax(radii[:, 0]))
            r1 = minimize_scalar(
                rad, bracket=(th[i_lo] - step, th[i_lo], th[i_lo] + step), tol=1e-10
            )
            r2 = minimize_scalar(
                lambda t: -rad(t), bracket=(th[i_hi] - step, th[i_hi], th[i_hi] + step), tol=1e-10
            )
            lo, hi = min(lo, float(r1.fun)), max(hi, -float(r2.fun))
        return lo, hi

    def radius_bounds(self):
        return self._radius_bounds

    def volume(self):
        if self.dim == 2:
            n = 64
            prev = None
            while True:
                t = 2 * np.pi * np.arange(n) / n
                u = np.stack([np.cos(t), np.sin(t)], axis=-1)
                val = 0.5 * np.sum(self.radial(u) ** 2) * (2 * np.pi / n)
                if prev is not None and abs(val - prev) <= 1e-13 * abs(val):
                    return float(val)
                prev, n = val, 2 * n
        n = 16
        prev = None
        while True:
            x, w = np.polynomial.legendre.leggauss(n)
            ph = 2 * np.pi * np.arange(2 * n) / (2 * n)
            C, P = np.meshgrid(x, ph, indexing="ij")
            S = np.sqrt(1 - C**2)
            u = np.stack([S * np.cos(P), S * np.sin(P), C], axis=-1)
            val = np.sum(w[:, None] * self.radial(u) ** 3) * (2 * np.pi / (2 * n)) / 3
            if prev is not None and abs(val - prev) <= 1e-13 * abs(val):
                return float(val)
            prev, n = val, 2 * n

    def to_dict(self):
        return {
            "kind": "perturbed_ball",
            "rho0": self.rho0,
            "modes": [{"freq": list(m.freq), "amp": m.amp} for m in self.modes],
        }

    def __repr__(self):
        return f"PerturbedBall(rho0={self.rho0}, modes={[(m.freq, m.amp) for m in self.modes]})"


# ----------------------------------------------------------------------
# module-level operations
# ----------------------------------------------------------------------


def _nonzero_vector(body: ConvexBody, x) -> np.ndarray:
    x = _as_points(x, body.dim)
    if x.ndim != 1:
        raise DomainError("expected a single d-vector")
    if not np.all(np.isfinite(x)) or not np.any(x != 0):
        raise DomainError("x must be a finite nonzero vector")
    return x


def support(body: ConvexBody, x) -> float:
    """``g(x) = sup_{y in body} x . y`` for a nonzero vector ``x``."""
    x = _nonzero_vector(body, x)
    return float(body.support(x))


def support_gradient(body: ConvexBody, x) -> BoundaryPoint:
    """The boundary point ``z(x)`` with outer normal ``x / |x|``."""
    x = _nonzero_vector(body, x)
    u = x / np.linalg.norm(x)
    return BoundaryPoint(
        point=np.asarray(body.boundary_point(x), dtype=float),
        normal=u,
        curvature=float(body.curvature(u)),
    )


def gauge(body: ConvexBody, x) -> float:
    """Minkowski functional; ``gauge(x) <= r`` iff ``x`` lies in ``r * body``."""
    x = _as_points(x, body.dim)
    return float(body.gauge(x))


def support_bounds(body: ConvexBody) -> tuple[float, float]:
    """``(A, B)`` with ``A |x| <= g(x) <= B |x|``."""
    return body.support_bounds()


def curvature_at_normal(body: ConvexBody, u) -> float:
    """Gaussian curvature ``K`` at the boundary point with outer unit normal ``u``."""
    u = _nonzero_vector(body, u)
    if abs(np.linalg.norm(u) - 1) > 1e-9:
        raise DomainError("u must be a unit vector")
    return float(body.curvature(u))


def body_from_dict(cfg: dict) -> ConvexBody:
    """Build a body from its JSON description."""
    try:
        kind = cfg["kind"]
        if kind == "ball":
            return Ball(float(cfg.get("radius", 1.0)), int(cfg.get("dim", 2)))
        if kind == "ellipsoid":
            return Ellipsoid(cfg["matrix"])
        if kind == "perturbed_ball":
            return PerturbedBall(float(cfg["rho0"]), cfg["modes"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed body description: {exc}") from exc
    raise DomainError(f"unknown body kind {cfg.get('kind')!r}")


def load_body(path) -> ConvexBody:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read body file {path}: {exc}") from exc
    return body_from_dict(cfg)
