"""Acceptance suite shared by ``disclab verify-all`` and the test-suite.

Each criterion returns a :class:`Criterion` whose ``detail`` holds only
deterministic numbers, so that two runs with the same seed serialize to the
same bytes.  Wall-clock times are kept apart in ``seconds``.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import lattice, spectra
from .bodies import Ball, Ellipsoid, PerturbedBall
from .fitting import envelope_slope
from .lemmas import (
    extent_growth,
    verify_crucial,
    verify_ellipse_integral,
    verify_integral_lemma,
    verify_mu_lemma,
)
from .measures import Dirac, Power, Uniform, fit_beta, measure_fourier
from .mollify import make_mollifier, mollified_discrepancy, remainder_diagnostic
from .norms import (
    critical_exponent,
    critical_lines,
    growth_report,
    interpolated_exponent,
    scan_norms,
)

__all__ = ["Criterion", "CRITERIA", "run_criterion", "run_all", "report_json", "format_table"]


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    detail: dict
    seconds: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail}


def _f(x) -> float:
    return float(x)


# ---------------------------------------------------------------- 1 counting


def _random_body(rng: np.random.Generator, i: int):
    kind, d = [("ball", 2), ("ellipsoid", 2), ("perturbed_ball", 2),
               ("ball", 3), ("ellipsoid", 3), ("perturbed_ball", 3)][i % 6]
    if kind == "ball":
        return Ball(float(rng.uniform(0.5, 1.5)), d)
    if kind == "ellipsoid":
        while True:
            M = np.eye(d) + 0.3 * rng.uniform(-1, 1, (d, d))
            if abs(np.linalg.det(M)) > 0.3:
                return Ellipsoid(M)
    if d == 2:
        return PerturbedBall(1.0, [((3,), float(rng.uniform(-0.03, 0.03))),
                                   ((5,), float(rng.uniform(-0.01, 0.01)))])
    return PerturbedBall(1.0, [((2, 1), float(rng.uniform(-0.03, 0.03)))])


def counting(seed: int) -> Criterion:
    rng = np.random.default_rng(seed)
    mismatches = []
    for i in range(100):
        body = _random_body(rng, i)
        r = float(rng.uniform(0.5, 30.0 if body.dim == 2 else 12.0))
        x = rng.uniform(0, 1, body.dim)
        a, b = lattice.count_lattice(body, r, x), lattice.brute_force_count(body, r, x)
        if a != b:
            mismatches.append({"instance": i, "kind": body.kind, "r": r, "slab": a, "brute": b})
    return Criterion(1, "counting: slab enumeration equals brute force", not mismatches,
                     {"instances": 100, "mismatches": mismatches})


# ---------------------------------------------------------------- 2 Parseval


def parseval(seed: int) -> Criterion:
    r, M, N = 20.0, 512, 1500
    ball = Ball(1.0)
    D = lattice.count_grid(ball, r, M) - r**2 * math.pi
    grid_l2 = float(np.mean(D**2))
    n = np.arange(-N, N + 1, dtype=float)
    n1, n2 = np.meshgrid(n, n, indexing="ij")
    keep = (n1**2 + n2**2 > 0) & (n1**2 + n2**2 <= N * N)
    xi = r * np.stack([n1[keep], n2[keep]], axis=-1)
    series = float(np.sum(r**4 * np.abs(spectra.ft_exact(ball, xi)) ** 2))
    rel = abs(grid_l2 / series - 1)
    return Criterion(2, "Parseval: grid L2 of the discrepancy against the Fourier sum", rel <= 0.02,
                     {"r": r, "grid": M, "N": N, "grid_l2": grid_l2, "series": series,
                      "relative_difference": rel})


# ---------------------------------------------------------------- 3 sandwich


def sandwich(seed: int) -> Criterion:
    rng = np.random.default_rng(seed)
    body = Ellipsoid(np.diag([2.0, 1.0]))
    moll = make_mollifier(body)
    delta, slack, n_r, n_x = 0.01, 1e-8, 25, 400
    vol = body.volume()
    violations, worst = 0, math.inf
    for r in rng.uniform(5.0, 50.0, n_r):
        lo_f = mollified_discrepancy(body, delta, r - delta, mollifier=moll)
        hi_f = mollified_discrepancy(body, delta, r + delta, mollifier=moll)
        M = lo_f.shape[0]
        idx = rng.integers(0, M, (n_x, 2))
        for i, j in idx:
            D = lattice.count_lattice(body, r, np.array([i, j]) / M) - r**2 * vol
            lo = vol * ((r - delta) ** 2 - r**2) + lo_f[i, j]
            hi = vol * ((r + delta) ** 2 - r**2) + hi_f[i, j]
            margin = min(D - lo, hi - D)
            worst = min(worst, margin)
            violations += margin < -slack
    return Criterion(3, "mollification sandwich at random (r, x)", violations == 0,
                     {"samples": n_r * n_x, "delta": delta, "violations": int(violations),
                      "worst_margin": _f(worst)})


# ---------------------------------------------------------------- 4 remainder


def remainder(seed: int) -> Criterion:
    ell = remainder_diagnostic(Ellipsoid(np.diag([2.0, 1.0])), 0.02, 0, np.geomspace(10, 500, 24))
    ball = remainder_diagnostic(Ball(1.0, 3), 0.2, 1, np.geomspace(10, 500, 12))
    ok3 = ball.slope <= -1.8 or ball.rounding_level
    return Criterion(4, "remainder decay of the leading expansion", ell.slope <= -0.9 and ok3,
                     {"ellipse_h0_slope": ell.slope, "ball3_h1_slope": ball.slope,
                      "ball3_rounding_level": ball.rounding_level,
                      "ball3_max_sup": _f(max(ball.sup))})


# ---------------------------------------------------------------- 5 FT order


def ft_order(seed: int) -> Criterion:
    ball = Ball(1.0)
    xs = np.geomspace(5, 200, 2000)
    xi = np.stack([xs, np.zeros_like(xs)], axis=-1)
    exact = spectra.ft_exact(ball, xi)
    slopes, ok = {}, True
    for h in (0, 1):
        err = np.abs(exact - spectra.ft_asymptotic(ball, xi, h))
        s = envelope_slope(xs, err, blocks=10).slope
        slopes[f"h{h}"] = s
        ok &= s <= -(2 + 2 * h + 3) / 2 + 0.1
    return Criterion(5, "asymptotic Fourier transform order", bool(ok), {"slopes": slopes})


# ---------------------------------------------------------------- 6 measures


def measures(seed: int) -> Criterion:
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-50, 50, 1000)
    ref = np.exp(-1j * np.pi * xi) * np.sin(np.pi * xi) / (np.pi * xi)
    uni_err = float(np.max(np.abs(measure_fourier(Uniform(), xi) - ref)))
    fits = {}
    ok = uni_err <= 1e-12
    for mu, target in [(Dirac(), 0.0), (Uniform(), 1.0), (Power(0.3), 0.7), (Power(0.6), 0.4)]:
        b = fit_beta(mu, 1000.0).beta_hat
        fits[mu.label()] = {"beta_hat": b, "target": target}
        ok &= abs(b - target) <= 0.1
    return Criterion(6, "measure transforms and fitted decay", bool(ok),
                     {"uniform_max_error": uni_err, "fits": fits})


# ---------------------------------------------------------------- 7, 8 norm scans


_LADDER = np.geomspace(10.0, 2000.0, 192)
_scan_cache: dict = {}


def _ball_scan():
    if "ball" not in _scan_cache:
        _scan_cache["ball"] = scan_norms(Ball(1.0), Dirac(), [2, 3, 4], _LADDER)
    return _scan_cache["ball"]


def kendall(seed: int) -> Criterion:
    I = _ball_scan()[0]
    rep = growth_report(2, "dirac", _LADDER, I)
    return Criterion(7, "L2 band over R in [10, 2000]", abs(rep.fit.kappa_hat) <= 0.1,
                     {"points": int(_LADDER.size), "kappa_hat": rep.fit.kappa_hat,
                      "spread": rep.fit.spread})


def growth_trend(seed: int) -> Criterion:
    I3, I4 = _ball_scan()[1], _ball_scan()[2]
    r3 = growth_report(3, "dirac", _LADDER, I3)
    halves = []
    for k in (0, 1):
        rep = growth_report(4, "dirac", _LADDER[k::2], I4[k::2])
        halves.append({"b": rep.fit.b, "b_se": rep.fit.b_se, "model": rep.fit.model})
    ok3 = r3.fit.model == "bounded"
    ok4 = all(h["b"] > 0 for h in halves)
    return Criterion(8, "growth trend: p=3 bounded, p=4 positive log slope", ok3 and ok4,
                     {"p3_model": r3.fit.model, "p3_spread": r3.fit.spread,
                      "p4_ladders": halves, "p3_pass": ok3, "p4_pass": ok4})


# ---------------------------------------------------------------- 9 exponent tables


def _reference_table(d: int, b: float, ellipse: bool):
    """Independent transcription: list of (lower, upper, p, log power) rows."""
    J = 1e-12
    if ellipse:
        rows = [(-1, 0.4 - J, lambda: 4 + 2 * b, None), (0.4 - J, 0.4 + J, lambda: 4.8, 1 / 4.8 + 1 / 12),
                (0.4 + J, 1 - J, lambda: 4 + 2 * b, None), (1 - J, 1 + J, lambda: 6.0, 5 / 6),
                (1 + J, math.inf, lambda: 6.0, 2 / 3)]
    elif d == 2:
        rows = [(-1, 0.4 - J, lambda: 4 + 2 * b, None), (0.4 - J, 0.4 + J, lambda: 4.8, 1 / 4.8 + 1 / 12),
                (0.4 + J, 0.5 - J, lambda: 4 + 10 * b / (3 + 5 * b), None),
                (0.5 - J, 0.5 + J, lambda: 54 / 11, 11 / 54 + 1 / 9),
                (0.5 + J, math.inf, lambda: 54 / 11, None)]
    else:
        top = 2 * (d - 1) / (d - 2)
        rows = [(-1, 1 - J, lambda: 2 * (d - b) / (d - b - 1), None),
                (1 - J, 1 + J, lambda: top, 0.75 if d == 3 else 0.5),
                (1 + J, math.inf, lambda: top, 0.5 if d == 3 else None)]
    for lo, hi, p, lp in rows:
        if lo < b < hi or (lo <= b <= hi and hi - lo < 1):
            pv = p()
            return pv, (1 / pv if lp is None else lp)
    raise AssertionError("table gap")


def _reference_lines(d: int, b: float, ellipse: bool):
    if ellipse:
        return 1.0, max(1.5 - b / 4, 1.25), max(5 / 3 - b / 6, 1.5)
    nu = 0.5 if d == 2 else 1.0
    z4 = (3 * d - min(b, nu)) / 4
    return d / 2, z4, (max(5 / 3 - b / 6, 1.6) if d == 2 else None)


def exponent_tables(seed: int) -> Criterion:
    betas = np.unique(np.concatenate([np.linspace(0.0, 2.5, 200), [0.4, 0.5, 1.0]]))
    bad = []
    cases = 0
    for d in range(2, 7):
        for ellipse in ((False, True) if d == 2 else (False,)):
            cls = "ellipse" if ellipse else "generic"
            for b in betas:
                b = float(b)
                p, lp = _reference_table(d, b, ellipse)
                got = critical_exponent(d, b, cls)
                interp = interpolated_exponent(d, b, cls)
                lines = critical_lines(d, b, cls)
                ref_lines = _reference_lines(d, b, ellipse)
                cases += 1
                errs = [abs(got.p_critical - p), abs(got.log_power_at_critical - lp),
                        abs(interp.p_critical - p), abs(interp.log_power_at_critical - lp)]
                errs += [abs(a - c) for a, c in zip(lines[:2], ref_lines[:2])]
                if (lines[2] is None) != (ref_lines[2] is None):
                    errs.append(math.inf)
                elif lines[2] is not None:
                    errs.append(abs(lines[2] - ref_lines[2]))
                if max(errs) > 1e-12:
                    bad.append({"d": d, "class": cls, "beta": b, "error": max(errs)})
    junctions = {
        "generic_2/5": abs((4 + 2 * 0.4) - (4 + 10 * 0.4 / (3 + 5 * 0.4))),
        "generic_1/2": abs((4 + 10 * 0.5 / (3 + 2.5)) - (4 + 10 / 11)),
        "ellipse_1": abs((4 + 2 * 1.0) - 6.0),
    }
    for d in range(3, 7):
        junctions[f"d{d}_1"] = abs(2 * (d - 1.0) / (d - 2.0) - 2 * (d - 1) / (d - 2))
    # implemented table at junction +- 1e-9: the gap must be of Lipschitz size
    steps = {}
    for name, (d, cls, j) in {"impl_generic_2/5": (2, "generic", 0.4),
                              "impl_generic_1/2": (2, "generic", 0.5),
                              "impl_ellipse_1": (2, "ellipse", 1.0),
                              "impl_d3_1": (3, "generic", 1.0)}.items():
        left = critical_exponent(d, j - 1e-9, cls).p_critical
        right = critical_exponent(d, j + 1e-9, cls).p_critical
        steps[name] = abs(left - right)
    ok = not bad and max(junctions.values()) <= 1e-12 and max(steps.values()) <= 1e-7
    return Criterion(9, "critical exponent tables and junction continuity", ok,
                     {"cases": cases, "mismatches": bad[:20], "junction_gaps": junctions,
                      "implemented_steps": steps})


# ---------------------------------------------------------------- 10 lemma stability


LEMMA_PLAN = [
    ("crucial(1)", lambda e: verify_crucial(1, 1.6, 0.7, X_max=e), 1000.0),
    ("crucial(2)", lambda e: verify_crucial(2, 1.5, 0.5, X_max=e), 1000.0),
    ("crucial(3)", lambda e: verify_crucial(3, 1.5, 0.3, X_max=e, T_max=e), 1000.0),
    ("crucial(4)", lambda e: verify_crucial(4, 1.3, 0.5, X_max=e, T_max=e), 1000.0),
    ("mu", lambda e: verify_mu_lemma(1.0, 1.0, Y_max=e, directions=(0.0,), n_Y=6), 1000.0),
    ("integral", lambda e: verify_integral_lemma(1.8, 0.7, k_max=e, directions=(0.0,), n_k=4,
                                                 n_Y=4), 200.0),
    ("ellipse(1)", lambda e: verify_ellipse_integral(1, 1.9, 0.5, k_max=e, n_k=4, n_Y=4), 200.0),
    ("ellipse(2)", lambda e: verify_ellipse_integral(2, 1.6, 0.1, k_max=e, n_k=4, n_Y=4), 200.0),
    ("ellipse(3)", lambda e: verify_ellipse_integral(3, 1.5, 0.5, k_max=e, n_k=4, n_Y=4), 200.0),
    ("ellipse(4)", lambda e: verify_ellipse_integral(4, 1.2, 0.3, k_max=e, n_k=4, n_Y=4), 400.0),
    ("ellipse(5)", lambda e: verify_ellipse_integral(5, 2.0, k_max=e, n_k=4), 200.0),
]


def lemma_stability(seed: int) -> Criterion:
    rows, ok = {}, True
    for name, run, extent in LEMMA_PLAN:
        small, large = run(extent), run(2 * extent)
        g = extent_growth(small, large)
        row = {"extent": extent, "sup_small": small.sup_ratio, "sup_large": large.sup_ratio,
               "growth": g, "resolved": large.resolved and small.resolved,
               "params": large.params}
        good = g < 0.05 and row["resolved"]
        if name == "ellipse(5)":
            excess = large.extra["absolute_excess"]
            row.update(bound=large.extra["bound"], sup_integral=large.sup_integral,
                       absolute_excess=excess)
            good &= excess <= 1e-6
        row["passed"] = bool(good)
        ok &= good
        rows[name] = row
    return Criterion(10, "lemma ratio stability under doubling", bool(ok), {"checks": rows})


# ---------------------------------------------------------------- 11 determinism


CRITERIA = {1: counting, 2: parseval, 3: sandwich, 4: remainder, 5: ft_order, 6: measures,
            7: kendall, 8: growth_trend, 9: exponent_tables, 10: lemma_stability}


def run_criterion(number: int, seed: int = 7) -> Criterion:
    t = time.perf_counter()
    c = CRITERIA[number](seed)
    c.seconds = time.perf_counter() - t
    return c


def report_json(results) -> str:
    return json.dumps({"criteria": [c.to_dict() for c in results]}, sort_keys=True, indent=2,
                      allow_nan=True, default=_numpy_scalar)


def _numpy_scalar(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def determinism(seed: int, first: str | None = None) -> Criterion:
    """Runs criteria 1-10 (twice when ``first`` is not supplied) and compares the bytes."""
    _scan_cache.clear()
    if first is None:
        first = report_json([run_criterion(n, seed) for n in sorted(CRITERIA)])
        _scan_cache.clear()
    second = report_json([run_criterion(n, seed) for n in sorted(CRITERIA)])
    same = first == second
    return Criterion(11, "determinism of the report for a fixed seed", same,
                     {"bytes": len(second), "identical": same})


def run_all(seed: int = 7, determinism_check: bool = True) -> list[Criterion]:
    _scan_cache.clear()
    results = [run_criterion(n, seed) for n in sorted(CRITERIA)]
    if determinism_check:
        t = time.perf_counter()
        c = determinism(seed, report_json(results))
        c.seconds = time.perf_counter() - t
        results.append(c)
    return results


def format_table(results) -> str:
    lines = []
    for c in results:
        lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.number:>2}  {c.name}  ({c.seconds:.1f} s)")
    return "\n".join(lines)
