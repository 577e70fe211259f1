"""Command-line front end.

Reports are byte-deterministic: keys are sorted, floats are printed with 17
significant digits, lines end in LF and nothing depends on the clock.  JSON
reports wrap the result with the tool version and the run configuration;
CSV reports carry the same information on leading ``#`` lines.

Exit codes: 0 on success, 2 when ``verify`` finds a violation, 1 on usage,
domain, input or I/O errors (with a one-line diagnostic on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import a_alpha_theta, a_theta, catalog, check_bound, get_bound
from .closed_form import chordal, j_metric, rho_ball_batch, rho_halfspace_batch
from .errors import InvalidSpec, IoFailure, QHLabError
from .geometry import make_domain
from .profiler import DEFAULT_BINS, EXAMPLES, divergence_sequence, phi_envelope
from .solver import geodesic, k_distance

COMMANDS = ("dist", "geodesic", "verify", "profile", "sequence", "constants")
METRICS = ("j", "k", "rho", "q")
WORKERS_ENV = "QHLAB_WORKERS"
CONSTANT_THETAS = tuple(round(0.1 * i, 1) for i in range(1, 10))
CONSTANT_ALPHAS = (0.1, 0.25, 0.5)


class UsageError(QHLabError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- deterministic serialization ---------------------------------------------------

def _float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    s = format(v, ".17g")
    return s if any(c in s for c in ".en") else s + ".0"


def dumps(obj) -> str:
    """JSON with sorted keys and 17-significant-digit floats; non-finite floats become null."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g") if math.isfinite(v) else ""
    if isinstance(v, (list, tuple, dict, np.ndarray)):
        return dumps(v)
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


@dataclass
class Report:
    """A command's result: a JSON payload and, for tabular results, a CSV body."""

    payload: dict
    csv_body: str | None = None
    violations: bool = False
    meta: dict = field(default_factory=dict)


def emit(report: Report, fmt: str, path: str | None, config: dict) -> str:
    """Render ``report`` and write it to ``path`` (stdout when ``None``)."""
    if fmt == "json":
        doc = {"tool": "qhlab", "version": __version__, "config": config,
               "result": report.payload}
        text = dumps(doc) + "\n"
    else:
        body = report.csv_body
        if body is None:
            body = csv_text(sorted(report.payload), [[report.payload[k] for k in
                                                       sorted(report.payload)]])
        text = f"# qhlab {__version__}\n# config {dumps(config)}\n" + body
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return text
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write '{path}': {exc.strerror or exc}") from exc
    return text


# --- argument parsing ----------------------------------------------------------------

def _floats(text: str, what: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got '{text}'") from None
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{what}: coordinates must be finite")
    return vals


def parse_points(text: str):
    parts = text.split(";")
    if len(parts) != 2:
        raise UsageError("--points expects 'x1,..,xn;y1,..,yn'")
    x, y = (_floats(p, "--points") for p in parts)
    if len(x) != len(y):
        raise UsageError("--points: both points need the same dimension")
    return x, y


def parse_region(text: str | None):
    if text is None:
        return None
    parts = text.split(";")
    if len(parts) != 2:
        raise UsageError("--region expects 'lo1,..;hi1,..'")
    lo, hi = (_floats(p, "--region") for p in parts)
    if len(lo) != len(hi) or not all(a < b for a, b in zip(lo, hi)):
        raise UsageError("--region: need lo < hi in every coordinate")
    return lo, hi


def load_domain_spec(inline: str | None, path: str | None) -> dict:
    if inline is not None and path is not None:
        raise UsageError("give the domain either inline (--domain) or as a file (--domain-file), "
                         "not both")
    if inline is None and path is None:
        raise UsageError("a domain is required (--domain or --domain-file)")
    if path is not None:
        try:
            inline = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot read '{path}': {exc.strerror or exc}") from exc
    try:
        spec = json.loads(inline)
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"domain is not valid JSON: {exc.msg}") from None
    if not isinstance(spec, dict):
        raise InvalidSpec("domain JSON must be an object")
    return spec


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qhlab", description="Quasihyperbolic metric toolkit.")
    p.add_argument("--version", action="version", version=f"qhlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt="json"):
        sp.add_argument("--tol", type=float, default=1e-3)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=("csv", "json"), default=fmt)

    def domain(sp):
        sp.add_argument("--domain", default=None, help="inline JSON domain spec")
        sp.add_argument("--domain-file", default=None, help="path to a JSON domain spec")

    def workers(sp):
        sp.add_argument("--workers", type=int, default=None,
                        help=f"worker processes (default: ${WORKERS_ENV} or 1)")

    sp = sub.add_parser("dist", help="distance between two points")
    domain(sp)
    sp.add_argument("--points", required=True)
    sp.add_argument("--metric", choices=METRICS, default="k")
    sp.add_argument("--method", choices=("auto", "closed", "numeric"), default="auto")
    sp.add_argument("--region", default=None)
    common(sp)

    sp = sub.add_parser("geodesic", help="polyline approximating a geodesic")
    domain(sp)
    sp.add_argument("--points", required=True)
    sp.add_argument("--region", default=None)
    common(sp, fmt="csv")

    sp = sub.add_parser("verify", help="check catalogued inequalities on seeded samples")
    sp.add_argument("--suite", default="all")
    sp.add_argument("--samples", type=int, default=10_000)
    workers(sp)
    common(sp)

    sp = sub.add_parser("profile", help="empirical phi-uniformity envelope")
    domain(sp)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--bins", type=int, default=DEFAULT_BINS)
    sp.add_argument("--axis", choices=("ratio", "j"), default="ratio")
    sp.add_argument("--region", default=None)
    workers(sp)
    common(sp, fmt="csv")
    sp.set_defaults(tol=1e-2)

    sp = sub.add_parser("sequence", help="j and k along a non-uniformity sequence")
    sp.add_argument("--example", choices=EXAMPLES, required=True)
    sp.add_argument("--n-max", type=int, default=8)
    workers(sp)
    common(sp, fmt="csv")
    sp.set_defaults(tol=1e-2)

    sp = sub.add_parser("constants", help="tabulate the constants a(theta) and a(alpha, theta)")
    common(sp, fmt="csv")
    return p


def _workers(args) -> int:
    w = getattr(args, "workers", None)
    if w is None:
        env = os.environ.get(WORKERS_ENV, "1")
        try:
            w = int(env)
        except ValueError:
            raise UsageError(f"${WORKERS_ENV} must be an integer, got '{env}'") from None
    if w < 1:
        raise UsageError("workers must be at least 1")
    return w


def run_config(args) -> dict:
    """The configuration embedded in reports; parallelism is excluded so output is independent of it."""
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "workers", "domain_file")}
    if getattr(args, "domain_spec", None) is not None:
        cfg["domain"] = args.domain_spec
    cfg.pop("domain_spec", None)
    return cfg


# --- commands ------------------------------------------------------------------------

def cmd_dist(args) -> Report:
    x, y = parse_points(args.points)
    oracle = make_domain(args.domain_spec)
    if args.metric == "k":
        res = k_distance(oracle, x, y, args.tol, method=args.method,
                         region=parse_region(args.region))
        payload = {"metric": "k", "value": res.value, "method": res.method,
                   "error_bound": res.error_bound, "lower": res.lower, "converged": res.converged}
    elif args.metric == "j":
        res = j_metric(oracle, x, y)
        payload = {"metric": "j", "value": res.value, "method": "closed_form", "error_bound": 0.0}
    elif args.metric == "rho":
        for p in (x, y):
            if not oracle.contains(p):
                raise InvalidSpec("both points must lie in the domain")
        X, Y = np.asarray([x]), np.asarray([y])
        if oracle.kind == "ball":
            c, R = oracle.shape.center, oracle.shape.radius
            value = float(rho_ball_batch((X - c) / R, (Y - c) / R)[0])
        elif oracle.kind == "half_space":
            value = float(rho_halfspace_batch(X, Y)[0])
        else:
            raise InvalidSpec("the hyperbolic metric is available on ball and half_space domains")
        payload = {"metric": "rho", "value": value, "method": "closed_form", "error_bound": 0.0}
    else:
        res = chordal(x, y)
        payload = {"metric": "q", "value": res.value, "method": "closed_form", "error_bound": 0.0}
    payload["x"], payload["y"] = x, y
    return Report(payload)


def cmd_geodesic(args) -> Report:
    x, y = parse_points(args.points)
    oracle = make_domain(args.domain_spec)
    path = geodesic(oracle, x, y, args.tol, region=parse_region(args.region))
    payload = {"k_length": path.k_length, "refinement_level": path.refinement_level,
               "converged": path.converged, "tol": path.tol,
               "vertices": path.vertices.tolist(), "cumulative_k": list(path.cumulative_k)}
    n = path.vertices.shape[1]
    body = csv_text([f"x{i + 1}" for i in range(n)] + ["cumulative_k"],
                    [list(p) + [c] for p, c in zip(path.vertices.tolist(), path.cumulative_k)])
    return Report(payload, body)


def cmd_verify(args) -> Report:
    if args.samples <= 0:
        raise UsageError("--samples must be positive")
    if args.suite == "all":
        specs = [s for s in catalog() if s.backend == "closed"]
        skipped = [s.name for s in catalog() if s.backend != "closed"]
    else:
        specs = [get_bound(args.suite)]
        skipped = []
    workers = _workers(args)
    reports = []
    for spec in specs:
        backend = "closed_only" if spec.backend == "closed" else "with_numeric"
        reports.append(check_bound(spec, args.samples, args.seed, backend, args.tol, workers))
    failed = any(not r.passed for r in reports)
    payload = {"pass": not failed, "bounds": [r.to_dict() for r in reports],
               "skipped_numeric": skipped}
    body = csv_text(["name", "backend", "pass", "samples", "hits", "violation_count", "min_margin",
                     "max_sharpness_defect"],
                    [[r.name, r.backend, r.passed, r.samples, r.hits, r.violation_count,
                      r.min_margin, r.max_sharpness_defect] for r in reports])
    return Report(payload, body, violations=failed)


def cmd_profile(args) -> Report:
    oracle = make_domain(args.domain_spec)
    axis = "ratio" if args.axis == "ratio" else "j_value"
    prof = phi_envelope(oracle, args.samples, args.bins, args.seed, axis,
                        parse_region(args.region), args.tol, workers=_workers(args))
    return Report(prof.to_dict(), prof.to_csv())


def cmd_sequence(args) -> Report:
    rep = divergence_sequence(args.example, args.n_max, args.tol, args.seed,
                              workers=_workers(args))
    return Report(rep.to_dict(), rep.to_csv())


def cmd_constants(args) -> Report:
    header = ["theta", "a_theta"] + [f"a_alpha_theta_{a:g}" for a in CONSTANT_ALPHAS]
    rows = []
    for th in CONSTANT_THETAS:
        rows.append([th, a_theta(th)] + [a_alpha_theta(a, th) for a in CONSTANT_ALPHAS])
    payload = {"rows": [dict(zip(header, r)) for r in rows]}
    return Report(payload, csv_text(header, rows))


HANDLERS = {"dist": cmd_dist, "geodesic": cmd_geodesic, "verify": cmd_verify,
            "profile": cmd_profile, "sequence": cmd_sequence, "constants": cmd_constants}


def run(argv=None) -> int:
    """Parse ``argv``, execute the command and emit its report; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
        if not (args.tol > 0 and math.isfinite(args.tol)):
            raise UsageError("--tol must be positive")
        args.domain_spec = None
        if hasattr(args, "domain"):
            args.domain_spec = load_domain_spec(args.domain, args.domain_file)
            del args.domain
        report = HANDLERS[args.command](args)
        emit(report, args.format, args.out, run_config(args))
    except QHLabError as exc:
        print(f"qhlab: error: {exc}", file=sys.stderr)
        return 1
    return 2 if report.violations else 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
