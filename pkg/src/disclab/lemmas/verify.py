"""Ratio checks of the integral inequalities.

Each check evaluates an integral on a parameter grid, divides it by the
asserted bound without its constant, and reports the supremum of the ratio.
"There exists C" is read as the stability of that supremum when the grid
extent doubles.  Every integral is computed at two quadrature orders.  The
difference between the two values serves as the error estimate of the
lower-order value; the higher-order value is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ..errors import DomainError, PreconditionError, UnconvergedError
from .exponents import ExponentPack, kron
from .quadrature import angular_rule, euclidean, ray_integrals, support_callable

__all__ = [
    "RatioReport",
    "crucial_integral",
    "crucial_bound",
    "verify_crucial",
    "mu_integral",
    "verify_mu_lemma",
    "pair_integral",
    "verify_integral_lemma",
    "ellipse_bound",
    "verify_ellipse_integral",
    "extent_growth",
]

_ORDER = 8
_CHECK_ORDER = 12
_QUAD_OPTS = dict(epsabs=0.0, epsrel=1e-11, limit=400)


@dataclass(frozen=True)
class RatioReport:
    """Supremum over a parameter grid of ``integral / bound``.

    ``quad_error`` is the largest quadrature error estimate divided by the
    bound at the same point, i.e. an absolute error on the ratio scale.
    """

    lemma: str
    params: dict
    grid: dict
    sup_ratio: float
    argmax: dict
    quad_error: float
    sup_integral: float
    points: int
    extra: dict = field(default_factory=dict)

    @property
    def resolved(self) -> bool:
        return self.quad_error <= 0.01 * self.sup_ratio

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "params": self.params,
            "grid": self.grid,
            "sup_ratio": self.sup_ratio,
            "argmax": self.argmax,
            "quad_error": self.quad_error,
            "sup_integral": self.sup_integral,
            "points": self.points,
            "resolved": self.resolved,
            "extra": self.extra,
        }


def extent_growth(small: RatioReport, large: RatioReport) -> float:
    """Relative growth of the supremum when the grid extent is enlarged."""
    return large.sup_ratio / small.sup_ratio - 1.0


def _collect(lemma, params, grid, rows) -> RatioReport:
    """``rows``: (point dict, integral, error, bound)."""
    if not rows:
        raise DomainError("empty parameter grid")
    ratios = np.array([v / b for _, v, _, b in rows])
    if not np.all(np.isfinite(ratios)):
        raise UnconvergedError("non-finite ratio on the grid")
    i = int(np.argmax(ratios))
    qerr = max(e / b for _, _, e, b in rows)
    return RatioReport(
        lemma, params, grid, float(ratios[i]), rows[i][0], float(qerr),
        float(max(v for _, v, _, _ in rows)), len(rows),
    )


# ---------------------------------------------------------------- 1-D integrals


def _quad(f, a, b, **kw):
    val, err = integrate.quad(f, a, b, **_QUAD_OPTS, **kw)
    return val, err


def _cut(X, beta):
    return lambda t: (1.0 + abs(X - t)) ** (-beta)


def _head(X, beta, power, c):
    """``int_0^c (1 + |X - t|)^{-beta} t^power dt`` with the kink kept outside or at c."""
    return _quad(_cut(X, beta), 0.0, c, weight="alg", wvar=(power, 0.0))


def _middle(X, beta, power, a, b):
    if b <= a:
        return 0.0, 0.0
    pts = [X] if a < X < b else None
    return _quad(lambda t: (1.0 + abs(X - t)) ** (-beta) * t**power, a, b, points=pts)


def _tail(X, beta, power, U):
    """``int_U^inf (1 + t - X)^{-beta} t^power dt`` for ``U > X``, via ``t = U / s``."""
    e = -power - 2 + beta  # s-exponent: s^{-power-2} s^{beta}
    f = lambda s: U ** (power + 1) * (s * (1 - X) + U) ** (-beta)
    return _quad(f, 0.0, 1.0, weight="alg", wvar=(e, 0.0))


def crucial_integral(case: int, alpha: float, beta: float, X: float, T: float | None = None):
    """The four one-dimensional integrals; returns ``(value, error estimate)``."""
    X = float(X)
    if case in (1, 3):
        p = 1.0 - alpha
        end = math.inf if case == 1 else float(T)
        c = X / 2 if X > 2 else 1.0
        c = min(c, end)
        v0, e0 = _head(X, beta, p, c)
        U = 2 * max(X, 1.0) + 2 if case == 1 else end
        v1, e1 = _middle(X, beta, p, c, U)
        v2, e2 = _tail(X, beta, p, U) if case == 1 else (0.0, 0.0)
        return v0 + v1 + v2, e0 + e1 + e2
    if case == 2:
        p = 1.0 - alpha
        s = min(max(X, 0.0), 1.0)
        neg = lambda f: (lambda t: -f(t))
        v0, e0 = (0.0, 0.0)
        if s > 0:
            v0, e0 = _quad(neg(_cut(X, beta)), 0.0, s, weight="alg-loga", wvar=(p, 0.0))
        if s < 1:
            if s == 0:
                v1, e1 = _quad(neg(_cut(X, beta)), 0.0, 1.0, weight="alg-loga", wvar=(p, 0.0))
            else:
                v1, e1 = _quad(lambda t: -(t**p) * math.log(t) * (1.0 + abs(X - t)) ** (-beta),
                               s, 1.0)
        else:
            v1, e1 = 0.0, 0.0
        return v0 + v1, e0 + e1
    if case == 4:
        p = 1.0 - 2 * alpha
        T = float(T)
        U = 2 * max(X, T) + 2
        v1, e1 = _middle(X, beta, p, T, U)
        v2, e2 = _tail(X, beta, p, U)
        return v1 + v2, e1 + e2
    raise DomainError("case must be 1, 2, 3 or 4")


def crucial_bound(case: int, alpha: float, beta: float, X: float, T: float | None = None) -> float:
    a = 1 + abs(X)
    if case == 1:
        return a ** (2 - alpha - min(beta, 1.0)) * math.log(2 + abs(X)) ** kron(1.0, beta)
    if case == 2:
        return a ** (-beta)
    if case == 3:
        return T ** (2 - alpha - beta) * math.log(T) ** kron(2 - alpha, beta)
    if case == 4:
        return T ** (2 - 2 * alpha - beta)
    raise DomainError("case must be 1, 2, 3 or 4")


def _check_crucial(case: int, alpha: float, beta: float) -> None:
    ok = {
        1: beta >= 0 and 0 < 2 - alpha < beta,
        2: alpha < 2,
        3: 0 <= beta < 1 and 2 - alpha >= beta and alpha < 2,
        4: 0 <= beta < 1 and alpha > 1,
    }
    if case not in ok:
        raise DomainError("case must be 1, 2, 3 or 4")
    if not ok[case]:
        raise PreconditionError(f"parameters (alpha={alpha}, beta={beta}) outside case ({case})")


def _x_grid(X_max: float, n: int) -> np.ndarray:
    pos = np.geomspace(1e-2, X_max, n)
    return np.concatenate([-pos[::-1], [0.0], pos])


def verify_crucial(case: int, alpha: float, beta: float, *, X_max: float = 1000.0, n_X: int = 24,
                   T_max: float = 1000.0, n_T: int = 12) -> RatioReport:
    """Sup over ``X`` (and ``T`` in cases 3, 4) of the integral over its bound."""
    _check_crucial(case, alpha, beta)
    Xs = _x_grid(X_max, n_X)
    Ts = np.geomspace(2.0, T_max, n_T) if case in (3, 4) else [None]
    rows = []
    for T in Ts:
        for X in Xs:
            v, e = crucial_integral(case, alpha, beta, X, T)
            pt = {"X": float(X)} if T is None else {"X": float(X), "T": float(T)}
            rows.append((pt, v, e, crucial_bound(case, alpha, beta, X, T)))
    grid = {"X_max": X_max, "n_X": n_X}
    if case in (3, 4):
        grid.update(T_max=T_max, n_T=n_T)
    return _collect(f"crucial({case})", {"alpha": alpha, "beta": beta}, grid, rows)


# ---------------------------------------------------------------- planar integrals


def _rays(theta):
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def mu_integral(k, Y: float, gamma: float, beta: float, delta: float = 1.0, g=euclidean,
                order: int = _ORDER):
    """``int_{|theta|=1} int_0^{delta Y} rho^{gamma-1} (1+|g(rho theta)+g(k-rho theta)-Y|)^{-beta}``.

    Returns ``(value, error estimate)`` from two quadrature orders.
    """
    k = np.asarray(k, dtype=float)
    om = math.atan2(k[1], k[0])
    vals = []
    for q in (order, _CHECK_ORDER if order == _ORDER else 2 * order):
        th, w = angular_rule(om, [0.0], q)
        v = ray_integrals(_rays(th), k, Y, g, beta, gamma - 1.0, 0.0, 0.0, delta * Y, q)
        vals.append(float(np.sum(w * v)))
    return vals[1], abs(vals[1] - vals[0])


def pair_integral(k, Y: float, alpha: float, beta: float, g=euclidean, inner: float = 0.0,
                  order: int = _ORDER):
    """``int |x|^{-a} |k-x|^{-a} (1+|g(x)+g(k-x)-Y|)^{-b} dx`` over ``|x|, |k-x| > inner``.

    The symmetry ``x -> k - x`` reduces the plane to the half plane nearer
    to the origin.  Returns ``(value, error estimate)``.
    """
    k = np.asarray(k, dtype=float)
    kn = float(np.linalg.norm(k))
    vals = []
    for q in (order, _CHECK_ORDER if order == _ORDER else 2 * order):
        if kn == 0:
            th, w = angular_rule(0.0, [0.0], q)
            hi = np.full(th.size, np.inf)
            fac = 1.0
        else:
            om = math.atan2(k[1], k[0])
            th, w = angular_rule(om, [0.0, 0.5 * np.pi, -0.5 * np.pi], q)
            c = np.cos(th - om)
            hi = np.where(c > 0, kn / (2 * np.where(c > 0, c, 1.0)), np.inf)
            fac = 2.0
        v = ray_integrals(_rays(th), k, Y, g, beta, 1.0 - alpha, alpha, inner, hi, q)
        vals.append(fac * float(np.sum(w * v)))
    return vals[1], abs(vals[1] - vals[0])


def _k_vectors(k_values, directions):
    return [np.array([kn * math.cos(a), kn * math.sin(a)]) for kn in k_values for a in directions]


def verify_mu_lemma(gamma: float, beta: float, *, body=None, d: int = 2,
                    k_values=(1.0, 10.0, 100.0), directions=(0.0, 1.0), Y_max: float = 1000.0,
                    n_Y: int = 8, delta: float = 1.0) -> RatioReport:
    """Product quadrature of the spherical integral against ``Y^{gamma - min(tau, 1/2)} log^{sigma+varsigma}``."""
    if d != 2:
        raise PreconditionError("the spherical integral is checked in d = 2 only")
    if not (gamma > 0 and beta >= 0 and delta > 0):
        raise PreconditionError("need gamma > 0, beta >= 0, delta > 0")
    g = support_callable(body)
    pack = ExponentPack(2, 1.0, beta, gamma)
    expo = gamma - min(pack.tau, 0.5)
    logp = pack.sigma + pack.varsigma
    rows = []
    for k in _k_vectors(k_values, directions):
        for Y in np.geomspace(1.0, Y_max, n_Y):
            v, e = mu_integral(k, Y, gamma, beta, delta, g)
            bound = Y**expo * math.log(2 + Y) ** logp
            rows.append(({"k": k.tolist(), "Y": float(Y)}, v, e, bound))
    grid = {"k_values": list(k_values), "directions": list(directions), "Y_max": Y_max,
            "n_Y": n_Y, "delta": delta}
    return _collect("mu", {"gamma": gamma, "beta": beta, "body": _body_name(body)}, grid, rows)


def _body_name(body) -> str:
    return "euclidean" if body is None else body.kind


def _y_values(gk: float, Y_max: float, n_Y: int) -> np.ndarray:
    ab = np.geomspace(1.0, Y_max, n_Y)
    rel = gk + np.array([0.0, 1.0, 4.0])
    return np.unique(np.concatenate([-ab, [0.0], ab, rel]))


def verify_integral_lemma(alpha: float, beta: float, *, body=None, d: int = 2,
                          k_max: float = 100.0, n_k: int = 5, directions=(0.0, 0.7),
                          Y_max: float | None = None, n_Y: int = 5) -> RatioReport:
    """The pair integral against ``|k|^{2-2a} (1+|k|+|Y|)^{-zeta} log^eta(2+|k|+|Y|)``."""
    if d != 2:
        raise PreconditionError("the pair integral is checked in d = 2 only")
    if not (1 < alpha < 2 and beta >= 0):
        raise PreconditionError("need d/2 < alpha < d and beta >= 0")
    g = support_callable(body)
    pack = ExponentPack(2, alpha, beta)
    Y_max = 2 * k_max if Y_max is None else Y_max
    rows = []
    for k in _k_vectors(np.geomspace(2.0, k_max, n_k), directions):
        kn = float(np.linalg.norm(k))
        for Y in _y_values(float(g(k)), Y_max, n_Y):
            v, e = pair_integral(k, Y, alpha, beta, g)
            s = 1 + kn + abs(Y)
            bound = kn ** (2 - 2 * alpha) * s ** (-pack.zeta) * math.log(2 + kn + abs(Y)) ** pack.eta
            rows.append(({"k": k.tolist(), "Y": float(Y)}, v, e, bound))
    grid = {"k_max": k_max, "n_k": n_k, "directions": list(directions), "Y_max": Y_max,
            "n_Y": n_Y}
    return _collect("integral", {"alpha": alpha, "beta": beta, "body": _body_name(body)},
                    grid, rows)


# ---------------------------------------------------------------- ellipse reduction


def _check_ellipse(case: int, alpha: float, beta: float) -> None:
    ok = {
        1: 1.5 <= alpha < 2 and beta > 2 - alpha,
        2: 1.5 < alpha < 2 and 0 <= beta <= 2 - alpha,
        3: kron(alpha, 1.5) == 1 and kron(beta, 0.5) == 1,
        4: 0.75 < alpha < 1.5 and beta >= 0 and 2 * alpha + beta > 2,
        5: alpha > 1,
    }
    if case not in ok:
        raise DomainError("case must be 1..5")
    if not ok[case]:
        raise PreconditionError(f"parameters (alpha={alpha}, beta={beta}) outside case ({case})")


def ellipse_bound(case: int, alpha: float, beta: float, kn: float, Y: float) -> float:
    Z = abs(Y - kn)
    lk = math.log(kn) if kn > 0 else 0.0
    if case == 1:
        return (kn ** (-alpha) * lk ** kron(1.5, alpha) * (1 + Z) ** (2 - alpha - min(1.0, beta))
                * math.log(2 + Z) ** kron(1.0, beta))
    if case == 2:
        return kn ** (2 - 2 * alpha - beta) * lk ** kron(2 - alpha, beta)
    if case == 3:
        return kn ** (-alpha) * lk**2
    if case == 4:
        if beta <= 0.5:
            return kn ** (2 - 2 * alpha - beta)
        return (kn ** (1.5 - 2 * alpha) * (1 + Z) ** (0.5 - min(1.0, beta))
                * math.log(2 + Z) ** kron(1.0, beta))
    if case == 5:
        return 1.0 / (2 * alpha - 2)
    raise DomainError("case must be 1..5")


def verify_ellipse_integral(case: int, alpha: float, beta: float = 0.0, *, k_max: float = 200.0,
                            n_k: int = 6, Y_span: float | None = None,
                            n_Y: int = 5) -> RatioReport:
    """Euclidean pair integrals against the five stated bounds.

    Cases 1-4 sample ``|k| >= 2`` and ``Y = |k| + s`` with offsets ``s`` of
    both signs.  Case 5 has no cutoff, excludes the unit discs around 0 and
    ``k`` and samples ``|k|`` from 0.  Its bound is an absolute constant, and
    ``extra["absolute_excess"]`` records ``max integral - (2 alpha - 2)^{-1}``.
    """
    _check_ellipse(case, alpha, beta)
    rows = []
    if case == 5:
        ks = np.concatenate([[0.0, 0.5, 1.0, 1.5], np.geomspace(2.0, k_max, n_k)])
        for kn in ks:
            v, e = pair_integral(np.array([kn, 0.0]), 0.0, alpha, 0.0, inner=1.0)
            rows.append(({"k": float(kn)}, v, e, ellipse_bound(5, alpha, beta, kn, 0.0)))
        rep = _collect("ellipse(5)", {"alpha": alpha, "beta": beta},
                       {"k_max": k_max, "n_k": n_k}, rows)
        excess = rep.sup_integral - 1.0 / (2 * alpha - 2)
        return RatioReport(rep.lemma, rep.params, rep.grid, rep.sup_ratio, rep.argmax,
                           rep.quad_error, rep.sup_integral, rep.points,
                           {"bound": 1.0 / (2 * alpha - 2), "absolute_excess": excess})
    Y_span = k_max if Y_span is None else Y_span
    offs = np.geomspace(0.5, Y_span, n_Y)
    offs = np.concatenate([-offs[::-1], [0.0], offs])
    for kn in np.geomspace(2.0, k_max, n_k):
        for s in offs:
            Y = kn + s
            v, e = pair_integral(np.array([kn, 0.0]), Y, alpha, beta)
            rows.append(({"k": float(kn), "Y": float(Y)}, v, e,
                         ellipse_bound(case, alpha, beta, kn, Y)))
    grid = {"k_max": k_max, "n_k": n_k, "Y_span": Y_span, "n_Y": n_Y}
    return _collect(f"ellipse({case})", {"alpha": alpha, "beta": beta}, grid, rows)
