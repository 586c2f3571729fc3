"""Command-line front end.

Subcommands: ``constants``, ``oracle``, ``maximal``, ``verify`` and ``sweep``.
Every command prints (or writes under ``--out``) a JSON document with the
resolved configuration, the arguments and a UTC timestamp; ``sweep`` also writes
a CSV table.  Exit codes: 0 success, 1 usage error, 2 precondition error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import load_config
from .constants import THEOREMS, ProblemData, compute_breakdown, resolve_theorem
from .gammamax import GammaSetup, estimate_min_constant, maximal_constants
from .operators import OperatorKind
from .oracle import InequalitySpec, best_constant
from .presets import LEVEL_PRESETS, parse_kernel, parse_weight
from .realfun import PreconditionError, parse_exponent, power
from .verify import SUITES, suite_levels, theorem_point

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_FAIL = 0, 1, 2, 3

CSV_COLUMNS = ("sweep_value", "A0", "A1", "A2", "total", "oracle", "ratio", "pass")
SWEEP_PARAMS = ("v.alpha", "u.alpha", "w.alpha", "p", "r", "q")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------

def _clean(obj):
    """Recursively replace non-finite floats by strings and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="key = value file (default: $HOL_CONFIG)")
    g.add_argument("--grid-points", type=int)
    g.add_argument("--xmin", type=float)
    g.add_argument("--xmax", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--band-lo", type=float)
    g.add_argument("--band-hi", type=float)
    g.add_argument("--out", help="directory for the JSON/CSV artifacts")


def _problem(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("problem")
    g.add_argument("--theorem", default="2.1",
                   help="theorem id or operator tag: " + ", ".join(f"{k}={v}" for k, v in THEOREMS.items()))
    g.add_argument("--kernel", default="indicator", help="indicator, difference, log_ratio or JSON")
    g.add_argument("--u", default="exp", help="weight preset, pow:A, exp:B, ind:A:B or JSON")
    g.add_argument("--v", default="one")
    g.add_argument("--w", default="exp")
    g.add_argument("--p", default="2")
    g.add_argument("--r", default="2")
    g.add_argument("--q", default="2")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hol", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hol {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("constants", help="characterization constants of one theorem")
    _problem(c)
    _common(c)

    o = sub.add_parser("oracle", help="oracle lower bound for the operator norm")
    _problem(o)
    o.add_argument("--compare", action="store_true", help="also compute the constants and the band check")
    o.add_argument("--witness", action="store_true", help="include the witness step function")
    _common(o)

    m = sub.add_parser("maximal", help="closed-form constants of the maximal-operator inequality")
    m.add_argument("--p", default="2")
    m.add_argument("--q", default="2")
    m.add_argument("--u", default="one")
    m.add_argument("--v", default="one")
    m.add_argument("--estimate", action="store_true", help="also run the decreasing-cone estimator")
    _common(m)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", default="all", choices=sorted(SUITES) + ["all"])
    v.add_argument("--preset", choices=LEVEL_PRESETS, help="restrict the levels suite to one weight")
    _common(v)

    s = sub.add_parser("sweep", help="sweep one parameter; writes JSON and CSV")
    _problem(s)
    s.add_argument("--param", default="v.alpha", choices=SWEEP_PARAMS)
    s.add_argument("--start", type=float, default=-0.5)
    s.add_argument("--stop", type=float, default=0.5)
    s.add_argument("--count", type=int, default=5)
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    _common(s)
    return parser


def _config(args):
    return load_config(args.config, grid_points=args.grid_points, x_min=args.xmin, x_max=args.xmax,
                       seed=args.seed, band_lo=args.band_lo, band_hi=args.band_hi)


def _problem_data(args, **override) -> ProblemData:
    u = override.get("u") or parse_weight(args.u)
    v = override.get("v") or parse_weight(args.v)
    w = override.get("w") or parse_weight(args.w)
    p = override.get("p", args.p)
    r = override.get("r", args.r)
    q = override.get("q", args.q)
    return ProblemData(u, v, w, parse_kernel(args.kernel),
                       parse_exponent(p), parse_exponent(r), parse_exponent(q))


def _args_json(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "config", "jobs")}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_constants(args, cfg) -> tuple[dict, int]:
    data = _problem_data(args)
    br = compute_breakdown(args.theorem, data, cfg)
    return {"problem": data.to_json(), "breakdown": br.to_json()}, EXIT_OK


def cmd_oracle(args, cfg) -> tuple[dict, int]:
    data = _problem_data(args)
    if args.compare:
        pt = theorem_point(args.theorem, data, cfg)
        return {"problem": data.to_json(), "oracle": pt["oracle"].to_json(args.witness),
                "breakdown": pt["breakdown"].to_json(), "equivalence": pt["report"].to_json()}, EXIT_OK
    _, tag = resolve_theorem(args.theorem)
    op = OperatorKind(tag, data.q, data.w, data.k)
    est = best_constant(InequalitySpec(op, data.p, data.v, r=data.r, u=data.u), cfg)
    return {"problem": data.to_json(), "oracle": est.to_json(args.witness)}, EXIT_OK


def cmd_maximal(args, cfg) -> tuple[dict, int]:
    setup = GammaSetup(parse_exponent(args.p), parse_exponent(args.q),
                       parse_weight(args.u), parse_weight(args.v))
    res = maximal_constants(setup, cfg)
    doc = {"setup": setup.to_json(), "constants": res, "total": res["total"]}
    if args.estimate:
        est = estimate_min_constant(setup, cfg)
        doc["estimate"] = est.to_json()
        doc["estimate_ratio"] = est.value / res["total"] if res["total"] > 0 else math.inf
    return doc, EXIT_OK


def cmd_verify(args, cfg) -> tuple[dict, int]:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    results = {}
    for name in names:
        if name == "levels" and args.preset:
            results[name] = suite_levels(cfg, presets=(args.preset,))
        else:
            results[name] = SUITES[name](cfg)
        print(f"{'PASS' if results[name]['pass'] else 'FAIL'} {name}", file=sys.stderr)
    ok = all(r["pass"] for r in results.values())
    return {"suites": results, "pass": ok}, EXIT_OK if ok else EXIT_FAIL


@dataclass(frozen=True)
class SweepSpec:
    param: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise PreconditionError("sweep count must be >= 1")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise PreconditionError("sweep range must be finite")
        if self.param not in SWEEP_PARAMS:
            raise PreconditionError(f"unknown sweep parameter {self.param!r}")

    def values(self) -> list[float]:
        if self.count == 1:
            return [self.start]
        return [float(x) for x in np.linspace(self.start, self.stop, self.count)]


def _sweep_point(args, cfg, value: float) -> dict:
    override = {}
    if args.param.endswith(".alpha"):
        name = args.param.split(".")[0]
        override[name] = parse_weight(getattr(args, name)) * power(value)
    else:
        override[args.param] = value
    data = _problem_data(args, **override)
    pt = theorem_point(args.theorem, data, cfg)
    br, rep = pt["breakdown"], pt["report"]
    return {"sweep_value": value, "A0": br.A0, "A1": br.A1, "A2": br.A2, "total": br.total,
            "oracle": rep.oracle, "ratio": rep.ratio, "pass": rep.passed,
            "breakdown": br.to_json(), "oracle_detail": pt["oracle"].to_json()}


def _sweep_task(payload):
    args, cfg, value = payload
    return _sweep_point(args, cfg, value)


def cmd_sweep(args, cfg) -> tuple[dict, int]:
    spec = SweepSpec(args.param, args.start, args.stop, args.count)
    values = spec.values()
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_task, [(args, cfg, x) for x in values]))
    else:
        rows = [_sweep_point(args, cfg, x) for x in values]
    rows.sort(key=lambda r: r["sweep_value"])
    ratios = [r["ratio"] for r in rows if r["ratio"] > 0]
    spread = max(ratios) / min(ratios) if ratios else math.inf
    ok = all(r["pass"] for r in rows)
    doc = {"sweep": {"param": spec.param, "start": spec.start, "stop": spec.stop, "count": spec.count},
           "columns": list(CSV_COLUMNS), "rows": rows, "spread": spread, "pass": ok}
    return doc, EXIT_OK if ok else EXIT_FAIL


def write_csv(path: str, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CSV_COLUMNS)
        for r in rows:
            wr.writerow([_clean(r[c]) if c != "pass" else int(bool(r[c])) for c in CSV_COLUMNS])


COMMANDS = {"constants": cmd_constants, "oracle": cmd_oracle, "maximal": cmd_maximal,
            "verify": cmd_verify, "sweep": cmd_sweep}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _config(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"hol: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result, code = COMMANDS[args.command](args, cfg)
    except PreconditionError as exc:
        print(f"hol: precondition error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    doc = {"command": args.command, "version": __version__, "args": _args_json(args),
           "config": cfg.to_json(), "result": result, "timestamp": _timestamp()}
    text = dumps(doc)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{args.command}.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        if args.command == "sweep":
            write_csv(os.path.join(args.out, "sweep.csv"), result["rows"])
    else:
        sys.stdout.write(text)
    if args.command == "verify":
        print("PASS" if code == EXIT_OK else "FAIL", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
