"""Command-line entry point ``disclab``.

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence.
JSON output is written with sorted keys; files are written atomically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import acceptance, lattice, mollify, spectra
from .bodies import body_from_dict
from .errors import DiscLabError, DomainError, ResolutionError, UnconvergedError
from .lemmas import (
    verify_crucial,
    verify_ellipse_integral,
    verify_integral_lemma,
    verify_mu_lemma,
    verify_n2_reduction,
)
from .measures import measure_fourier, measure_from_dict
from .norms import Resolution, critical_exponent, critical_lines, geometric_ladder, scan_growth

EXIT_OK, EXIT_INVALID, EXIT_UNCONVERGED = 0, 2, 3


# ---------------------------------------------------------------- helpers


def _load_json_arg(text: str, what: str) -> dict:
    """A JSON file path, or an inline JSON object."""
    if text.lstrip().startswith("{"):
        src = text
    else:
        try:
            src = Path(text).read_text()
        except OSError as exc:
            raise DomainError(f"cannot read {what} file {text}: {exc}") from exc
    try:
        cfg = json.loads(src)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{what} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise DomainError(f"{what} must be a JSON object")
    return cfg


def _body(text):
    return body_from_dict(_load_json_arg(text, "body"))


def _measure(text):
    return measure_from_dict(_load_json_arg(text, "measure"))


def _vector(text: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise DomainError(f"cannot parse vector {text!r}") from exc
    if not np.all(np.isfinite(v)):
        raise DomainError("vector entries must be finite")
    return v


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise DomainError(f"cannot parse complex number {text!r}") from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text: str) -> None:
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get("DISCLAB_THREADS")
        try:
            n = int(env) if env else 1
        except ValueError as exc:
            raise DomainError("DISCLAB_THREADS must be an integer") from exc
    if n < 1:
        raise DomainError("thread count must be >= 1")
    return n


def _positive(name, value, strict=True):
    if not math.isfinite(value) or (value <= 0 if strict else value < 0):
        raise DomainError(f"--{name} must be {'positive' if strict else 'nonnegative'}")


# ---------------------------------------------------------------- subcommands


def cmd_count(args):
    body = _body(args.body)
    x = _vector(args.x)
    s = lattice.discrepancy(body, args.r, x)
    return dumps({"count": s.count, "r": s.r, "x": list(s.x), "volume_term": s.volume_term,
                  "D": s.D})


def cmd_discrepancy(args):
    body = _body(args.body)
    if args.x is not None:
        s = lattice.discrepancy(body, args.r, _vector(args.x))
        return dumps({"r": s.r, "x": list(s.x), "count": s.count, "D": s.D,
                      "normalized": s.D * s.r ** (-(body.dim - 1) / 2)})
    M = args.grid
    counts = lattice.count_grid(body, args.r, M)
    D = counts - args.r**body.dim * lattice.volume(body)
    if args.format == "csv":
        idx = np.indices(D.shape).reshape(body.dim, -1).T
        rows = [tuple(i / M) + (float(v),) for i, v in zip(idx, D.ravel())]
        return _csv([f"x{k + 1}" for k in range(body.dim)] + ["D"], rows)
    return dumps({"r": args.r, "grid": M, "mean": float(D.mean()),
                  "l2": float(np.sqrt(np.mean(D**2))), "min": float(D.min()),
                  "max": float(D.max())})


def cmd_ft(args):
    body = _body(args.body)
    xi = _vector(args.xi)
    if xi.size != body.dim:
        raise DomainError("--xi must have one entry per dimension")
    out = {"xi": xi, "exact": complex(spectra.ft_exact(body, xi))}
    if args.h is not None:
        out["asymptotic"] = complex(spectra.ft_asymptotic(body, xi, args.h))
        out["h"] = args.h
    return dumps(out)


def cmd_phi(args):
    body = _body(args.body)
    series = mollify.build_series(body, args.delta, _complex(args.z), args.h, grid=args.grid)
    field_ = mollify.phi_family(series, args.r, workers=_threads(args))
    if args.format == "csv":
        M = field_.shape[0]
        idx = np.indices(field_.shape).reshape(body.dim, -1).T
        rows = [tuple(i / M) + (float(v.real), float(v.imag)) for i, v in zip(idx, field_.ravel())]
        return _csv([f"x{k + 1}" for k in range(body.dim)] + ["re", "im"], rows)
    a = np.abs(field_)
    return dumps({"grid": series.grid, "n_max": series.n_max, "delta": series.delta,
                  "z": series.z, "r": args.r, "max_abs": float(a.max()),
                  "l2": float(np.sqrt(np.mean(a**2))), "l4": float(np.mean(a**4) ** 0.25),
                  "max_imag": float(np.max(np.abs(field_.imag)))})


def cmd_measure_fft(args):
    mu = _measure(args.measure)
    xi = _vector(args.xi)
    vals = np.atleast_1d(measure_fourier(mu, xi))
    if xi.size == 1:
        return dumps({"xi": float(xi[0]), "re": float(vals[0].real), "im": float(vals[0].imag)})
    return dumps({"values": [{"xi": float(x), "re": float(v.real), "im": float(v.imag)}
                             for x, v in zip(xi, vals)]})


def cmd_norm_scan(args):
    body, mu = _body(args.body), _measure(args.measure)
    if args.points < 8:
        raise DomainError("--points must be at least 8")
    if not (10 <= args.R_min < args.R_max <= 1e4):
        raise DomainError("need 10 <= R-min < R-max <= 1e4")
    res = Resolution(grid=args.grid, r_budget=args.r_budget, method=args.method, delta=args.delta)
    ladder = geometric_ladder(args.R_min, args.R_max, args.points)
    scan = scan_growth(body, mu, args.p, ladder, res, workers=_threads(args))
    report = scan.to_dict()
    report["method"] = args.method
    if args.report:
        write_atomic(args.report, dumps(report))
    if args.format == "json":
        return dumps(report)
    return _csv(["R", "I"], zip(scan.R, scan.I))


def cmd_critical(args):
    cls = "ellipse" if args.ellipse else "generic"
    c = critical_exponent(args.d, args.beta, cls)
    out = {"p_critical": c.p_critical, "log_power": c.log_power_at_critical}
    if args.full:
        z2, z4, z6 = critical_lines(args.d, args.beta, cls)
        out.update(d=c.d, beta=c.beta, body_class=cls, z2=z2, z4=z4, z6=z6)
    return dumps(out)


def cmd_lemma(args):
    kind = args.lemma
    if kind == "crucial":
        rep = verify_crucial(args.case, args.alpha, args.beta, X_max=args.X_max, n_X=args.n_X,
                             T_max=args.T_max, n_T=args.n_T)
    elif kind == "mu":
        body = _body(args.body) if args.body else None
        rep = verify_mu_lemma(args.gamma, args.beta, body=body, Y_max=args.Y_max, n_Y=args.n_Y,
                              delta=args.delta)
    elif kind == "integral":
        body = _body(args.body) if args.body else None
        rep = verify_integral_lemma(args.alpha, args.beta, body=body, k_max=args.k_max,
                                    n_k=args.n_k, n_Y=args.n_Y)
    elif kind == "ellipse-integral":
        rep = verify_ellipse_integral(args.case, args.alpha, args.beta, k_max=args.k_max,
                                      n_k=args.n_k, n_Y=args.n_Y)
    else:
        rep = verify_n2_reduction(_body(args.body), args.z, args.beta, args.delta,
                                  _measure(args.measure), args.R)
    return dumps(rep.to_dict())


def cmd_verify_all(args):
    if args.criteria:
        numbers = sorted({int(t) for t in args.criteria.split(",")})
        if any(n not in acceptance.CRITERIA and n != 11 for n in numbers):
            raise DomainError("criteria are numbered 1 to 11")
        results = [acceptance.run_criterion(n, args.seed) for n in numbers if n != 11]
        if 11 in numbers:
            results.append(acceptance.determinism(args.seed))
    else:
        results = acceptance.run_all(args.seed, determinism_check=not args.no_determinism)
    report = acceptance.report_json(results) + "\n"
    if args.out:
        write_atomic(args.out, report)
    for c in results:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.number:>2}  {c.name}")
        print(f"      {c.number:>2}  {c.seconds:.1f} s", file=sys.stderr)
    if not args.out:
        sys.stdout.write(report)
    if args.strict and not all(c.passed for c in results):
        return 1
    return None


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (written atomically); default stdout")
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap (default: DISCLAB_THREADS or 1)")
    common.add_argument("--seed", type=int, default=7, help="seed for randomized steps")
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="output format (default json; csv for norm-scan)")

    p = argparse.ArgumentParser(prog="disclab",
                                description="Lattice point discrepancy experiments.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("count", parents=[common], help="exact lattice point count")
    s.add_argument("--body", required=True)
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--x", required=True, help="shift, comma separated")
    s.set_defaults(func=cmd_count)

    s = sub.add_parser("discrepancy", parents=[common], help="discrepancy at a shift or on a grid")
    s.add_argument("--body", required=True)
    s.add_argument("--r", type=float, required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--x")
    g.add_argument("--grid", type=int, help="grid size M (power of two)")
    s.set_defaults(func=cmd_discrepancy)

    s = sub.add_parser("ft", parents=[common], help="Fourier transform of the indicator")
    s.add_argument("--body", required=True)
    s.add_argument("--xi", required=True)
    s.add_argument("--h", type=int, default=None, help="also the asymptotic expansion of order h")
    s.set_defaults(func=cmd_ft)

    s = sub.add_parser("phi", parents=[common], help="analytic family on the FFT grid")
    s.add_argument("--body", required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--z", required=True, help="complex exponent, e.g. 1.5 or 1.5+0.3j")
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--h", type=int, default=0)
    s.add_argument("--grid", type=int, default=None)
    s.set_defaults(func=cmd_phi)

    s = sub.add_parser("measure-fft", parents=[common], help="Fourier transform of a measure")
    s.add_argument("--measure", required=True)
    s.add_argument("--xi", required=True, help="frequency or comma separated list")
    s.set_defaults(func=cmd_measure_fft)

    s = sub.add_parser("norm-scan", parents=[common], help="growth scan of the mixed norm")
    s.add_argument("--body", required=True)
    s.add_argument("--measure", required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--R-min", dest="R_min", type=float, default=10.0)
    s.add_argument("--R-max", dest="R_max", type=float, default=2000.0)
    s.add_argument("--points", type=int, default=12)
    s.add_argument("--method", choices=("exact", "spectral"), default="exact")
    s.add_argument("--grid", type=int, default=None)
    s.add_argument("--r-budget", dest="r_budget", type=int, default=32)
    s.add_argument("--delta", type=float, default=None)
    s.add_argument("--report", help="JSON fit report path")
    s.set_defaults(func=cmd_norm_scan)

    s = sub.add_parser("critical", parents=[common], help="critical exponent table row")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--ellipse", action="store_true")
    s.add_argument("--full", action="store_true", help="add the critical lines")
    s.set_defaults(func=cmd_critical)

    s = sub.add_parser("lemma-check", help="ratio checks of the integral inequalities")
    lem = s.add_subparsers(dest="lemma", required=True, metavar="LEMMA")
    t = lem.add_parser("crucial", parents=[common])
    t.add_argument("--case", type=int, required=True)
    t.add_argument("--alpha", type=float, required=True)
    t.add_argument("--beta", type=float, required=True)
    t.add_argument("--X-max", dest="X_max", type=float, default=1000.0)
    t.add_argument("--n-X", dest="n_X", type=int, default=24)
    t.add_argument("--T-max", dest="T_max", type=float, default=1000.0)
    t.add_argument("--n-T", dest="n_T", type=int, default=12)
    t = lem.add_parser("mu", parents=[common])
    t.add_argument("--gamma", type=float, required=True)
    t.add_argument("--beta", type=float, required=True)
    t.add_argument("--body", default=None)
    t.add_argument("--Y-max", dest="Y_max", type=float, default=1000.0)
    t.add_argument("--n-Y", dest="n_Y", type=int, default=8)
    t.add_argument("--delta", type=float, default=1.0)
    t = lem.add_parser("integral", parents=[common])
    t.add_argument("--alpha", type=float, required=True)
    t.add_argument("--beta", type=float, required=True)
    t.add_argument("--body", default=None)
    t.add_argument("--k-max", dest="k_max", type=float, default=100.0)
    t.add_argument("--n-k", dest="n_k", type=int, default=5)
    t.add_argument("--n-Y", dest="n_Y", type=int, default=5)
    t = lem.add_parser("ellipse-integral", parents=[common])
    t.add_argument("--case", type=int, required=True)
    t.add_argument("--alpha", type=float, required=True)
    t.add_argument("--beta", type=float, default=0.0)
    t.add_argument("--k-max", dest="k_max", type=float, default=200.0)
    t.add_argument("--n-k", dest="n_k", type=int, default=6)
    t.add_argument("--n-Y", dest="n_Y", type=int, default=5)
    t = lem.add_parser("n2", parents=[common])
    t.add_argument("--body", required=True)
    t.add_argument("--z", type=float, required=True)
    t.add_argument("--beta", type=float, default=None)
    t.add_argument("--delta", type=float, required=True)
    t.add_argument("--measure", required=True)
    t.add_argument("--R", type=float, required=True)
    s.set_defaults(func=cmd_lemma)

    s = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    s.add_argument("--criteria", help="comma separated subset, e.g. 1,2,9")
    s.add_argument("--no-determinism", action="store_true",
                   help="skip the second run behind criterion 11")
    s.add_argument("--strict", action="store_true", help="exit 1 if any criterion fails")
    s.set_defaults(func=cmd_verify_all)
    return p


def _validate(args) -> None:
    """Numeric checks that must pass before any computation starts."""
    if getattr(args, "threads", None) is not None and args.threads < 1:
        raise DomainError("--threads must be >= 1")
    for name in ("r", "delta", "R"):
        v = getattr(args, name, None)
        if isinstance(v, float):
            _positive(name, v)
    if getattr(args, "grid", None) is not None:
        M = args.grid
        if M < 2 or M & (M - 1):
            raise DomainError("--grid must be a power of two >= 2")
    for name in ("h",):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise DomainError("--h must be >= 0")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "format", None) is None:
        args.format = "csv" if args.command == "norm-scan" else "json"
    try:
        _validate(args)
        out = args.func(args)
    except (UnconvergedError, ResolutionError) as exc:
        print(f"disclab: {exc}", file=sys.stderr)
        return EXIT_UNCONVERGED
    except (DiscLabError, ValueError) as exc:
        print(f"disclab: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if isinstance(out, int):
        return out
    if out is not None:
        _emit(args, out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
