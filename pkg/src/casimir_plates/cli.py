"""Command-line front end.

    casimir-plates density --bc dirichlet --d 1 --z-grid 0.1:0.9:9 --method limit
    casimir-plates energy --bc dirichlet --d 2 --lambda-sweep 0.02,0.01,0.005
    casimir-plates verify [--only thm41]
    casimir-plates report --out report.json

Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
3 numerical failure (accuracy, fit disagreement, singular point with --strict).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass
from importlib import metadata

import numpy as np

from . import __version__, acceptance, counterterm, eulermac, imagesum, modesum
from .errors import (AccuracyError, CapabilityError, DecompositionError, DomainError,
                     SingularityError)
from .modesum import BoundaryCondition, PlateGeometry
from .regulator import BUILTINS, get_regulator

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULT_TOL = {"density": 1e-8, "energy": 1e-4}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    bc: str
    d: float
    lam: float | None
    lambda_sweep: tuple | None
    z: tuple | None
    method: str
    regulator: str
    tol: float
    out: str | None
    format: str
    strict: bool
    only: str | None


# --- parsing -------------------------------------------------------------------------

def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _finite(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return v


def _sweep(text):
    return tuple(_positive(t) for t in text.split(",") if t.strip())


def _grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("z grid must be start:stop:count")
    start, stop = _finite(parts[0]), _finite(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid count must be an integer: {parts[2]!r}") from None
    if count < 1:
        raise argparse.ArgumentTypeError("grid count must be >= 1")
    return tuple(float(v) for v in np.linspace(start, stop, count))


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--bc", choices=[b.value for b in BoundaryCondition], default="dirichlet")
    common.add_argument("--d", type=_positive, default=1.0, help="plate separation")
    lam = common.add_mutually_exclusive_group()
    lam.add_argument("--lambda", dest="lam", type=_positive, help="cutoff length")
    lam.add_argument("--lambda-sweep", type=_sweep, help="comma-separated cutoffs")
    zg = common.add_mutually_exclusive_group()
    zg.add_argument("--z", type=_finite)
    zg.add_argument("--z-grid", type=_grid, help="start:stop:count")
    common.add_argument("--method", choices=["direct", "closed", "limit"], default=None)
    common.add_argument("--regulator", choices=sorted(BUILTINS), default="exp")
    common.add_argument("--tol", type=_positive, default=None,
                        help="relative accuracy target (density) or fit tolerance (energy)")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--strict", action="store_true",
                        help="fail on singular density points instead of writing inf")
    common.add_argument("--only", default=None, help="criterion filter for verify/report")

    parser = _Parser(prog="casimir-plates", description="Casimir energy between parallel plates")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("density", parents=[common], help="vacuum energy density profile")
    sub.add_parser("energy", parents=[common], help="energy per unit area and its decomposition")
    sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    sub.add_parser("report", parents=[common], help="machine-readable acceptance report")
    return parser


def resolve(argv) -> RunConfig:
    """Parse and validate arguments; raises ConfigError on any invalid setting."""
    ns = build_parser().parse_args(argv)
    cmd = ns.command
    z = (ns.z,) if ns.z is not None else ns.z_grid
    method = ns.method
    fmt = ns.format
    if cmd == "density":
        method = method or ("direct" if ns.lam is not None else "limit")
        fmt = fmt or "csv"
        if z is None:
            raise ConfigError("density needs --z or --z-grid")
        if ns.lambda_sweep is not None:
            raise ConfigError("density takes a single --lambda, not a sweep")
        if method in ("direct", "closed") and ns.lam is None:
            raise ConfigError(f"method {method} needs --lambda")
        if method == "closed" and ns.regulator != "exp":
            raise ConfigError("the closed image-sum form exists for the exp regulator only")
        if method == "direct" and not math.isfinite(float(
                get_regulator(ns.regulator).tail_moment(3, 0))):
            raise ConfigError(f"regulator {ns.regulator} has no finite free-space integral; "
                              "direct density is unavailable")
    elif cmd == "energy":
        method = method or "direct"
        fmt = fmt or "json"
        if method != "direct":
            raise ConfigError("energy supports --method direct only")
        lams = ns.lambda_sweep or ((ns.lam,) if ns.lam is not None else None)
        if lams is None:
            raise ConfigError("energy needs --lambda or --lambda-sweep")
        if max(lams) >= 0.2 * ns.d:
            raise ConfigError("all cutoffs must be below 0.2 d")
    else:
        method = method or "direct"
        fmt = fmt or ("json" if cmd == "report" else "csv")
    tol = ns.tol if ns.tol is not None else DEFAULT_TOL.get(cmd, 1e-8)
    if ns.only is not None:
        try:
            acceptance.select(ns.only)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
    return RunConfig(cmd, ns.bc, ns.d, ns.lam, ns.lambda_sweep, z, method, ns.regulator, tol,
                     ns.out, fmt, ns.strict, ns.only)


# --- output helpers ------------------------------------------------------------------

def _num(v):
    """JSON-safe number: floats as shortest round-trip literals, non-finite as strings."""
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        v = float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _num(obj)


def _dump_json(record) -> str:
    return json.dumps(_clean(record), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _dump_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def provenance(cfg: RunConfig) -> dict:
    deps = {}
    for name in ("numpy", "scipy", "mpmath", "sympy"):
        try:
            deps[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            deps[name] = "unknown"
    return {"package": "casimir-plates", "version": __version__, "dependencies": deps,
            "mode_sum_precision_digits": modesum.WORKING_DPS}


# --- commands ------------------------------------------------------------------------

def cmd_density(cfg: RunConfig):
    geom = PlateGeometry(cfg.d, cfg.bc)
    reg = get_regulator(cfg.regulator)
    rows = []
    code = EXIT_OK
    for z in cfg.z:
        try:
            if cfg.method == "limit":
                val = imagesum.density_limit(z, cfg.d, cfg.bc)
            elif cfg.method == "closed":
                val = imagesum.density_closed(z, cfg.d, cfg.lam, cfg.bc)
            else:
                trunc = modesum.truncation_tol(cfg.tol, cfg.lam, cfg.d)
                val = modesum.density_direct(z, geom, cfg.lam, reg, tol=trunc).value
        except SingularityError:
            val = math.inf
            if cfg.strict:
                code = EXIT_NUMERIC
        rows.append((z, val))
    if cfg.format == "csv":
        return _dump_csv(["z", "value"], rows), code
    record = {"config": dataclasses.asdict(cfg), "rows": [{"z": z, "value": v} for z, v in rows],
              "provenance": provenance(cfg)}
    return _dump_json(record), code


def cmd_energy(cfg: RunConfig):
    geom = PlateGeometry(cfg.d, cfg.bc)
    reg = get_regulator(cfg.regulator)
    lams = sorted(set(cfg.lambda_sweep or (cfg.lam,)))
    has_direct = math.isfinite(float(reg.tail_moment(3, 0)))
    record = {"config": dataclasses.asdict(cfg), "lambdas": lams, "direct": None,
              "renormalized": None, "decomposition": None, "provenance": provenance(cfg)}
    code = EXIT_OK
    try:
        if has_direct:
            record["direct"] = [modesum.energy_per_area_direct(geom, lam, reg) for lam in lams]
        method = "direct" if has_direct else "euler_maclaurin"
        record["renormalized"] = [counterterm.renormalized_energy_per_area(geom, lam, reg,
                                                                           method=method)
                                  for lam in lams]
        record["renormalized_method"] = method
        if len(lams) >= 2:
            dec = eulermac.decompose_energy(geom, reg, lams, fit_tol=cfg.tol)
            record["decomposition"] = {
                "c_div": dec.c_div, "eps_f": dec.eps_f,
                "remainder_exponent": dec.remainder_exponent,
                "fit_c_div": dec.fit_c_div, "fit_eps_f": dec.fit_eps_f,
                "fit_agreement": dec.agreement}
    except (DecompositionError, AccuracyError) as exc:
        record["error"] = f"{type(exc).__name__}: {exc}"
        code = EXIT_NUMERIC
    if cfg.format == "json":
        return _dump_json(record), code
    rows = []
    for i, lam in enumerate(lams):
        rows.append((lam, record["direct"][i] if record["direct"] else "",
                     record["renormalized"][i] if record["renormalized"] else ""))
    text = _dump_csv(["lambda", "direct", "renormalized"], rows)
    if record["decomposition"]:
        dec = record["decomposition"]
        text += _dump_csv(["c_div", "eps_f", "remainder_exponent"],
                          [(dec["c_div"], dec["eps_f"], dec["remainder_exponent"])])
    return text, code


def _check_record(c):
    return {"name": c.name, "target": c.target, "tol": c.tol, "passed": c.passed,
            "gating": c.gating, "achieved": None if c.timing else c.achieved}


def _verification(cfg, progress=None):
    results = acceptance.run_acceptance(cfg.only, progress=progress)
    code = EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY
    return results, code


def _report_record(cfg, results):
    return {"config": dataclasses.asdict(cfg), "provenance": provenance(cfg),
            "criteria": [{"number": r.number, "key": r.key, "title": r.title,
                          "passed": r.passed, "error": r.error,
                          "checks": [_check_record(c) for c in r.checks]} for r in results],
            "passed": all(r.passed for r in results)}


def cmd_verify(cfg: RunConfig, stream=None):
    progress = None
    if stream is not None and cfg.out is None and cfg.format == "csv":
        def progress(res):
            print(acceptance.format_criterion(res), file=stream, flush=True)
    results, code = _verification(cfg, progress)
    if cfg.format == "json":
        return _dump_json(_report_record(cfg, results)), code
    table = "\n".join(acceptance.format_criterion(r) for r in results)
    summary = f"{sum(r.passed for r in results)}/{len(results)} criteria passed"
    if progress is not None:
        return summary + "\n", code
    return table + "\n" + summary + "\n", code


def cmd_report(cfg: RunConfig):
    results, code = _verification(cfg)
    if cfg.format == "json":
        return _dump_json(_report_record(cfg, results)), code
    rows = [(r.number, r.key, c.name, c.passed, c.gating,
             "" if c.timing else acceptance._fmt(c.achieved))
            for r in results for c in r.checks]
    return _dump_csv(["criterion", "key", "check", "passed", "gating", "achieved"], rows), code


def _dispatch(cfg: RunConfig, stream=None):
    if cfg.command == "density":
        return cmd_density(cfg)
    if cfg.command == "energy":
        return cmd_energy(cfg)
    if cfg.command == "verify":
        return cmd_verify(cfg, stream)
    return cmd_report(cfg)


def render(argv) -> str:
    """Output text for the given arguments (no file is written)."""
    return _dispatch(resolve(argv))[0]


def main(argv=None) -> int:
    try:
        cfg = resolve(sys.argv[1:] if argv is None else argv)
        text, code = _dispatch(cfg, sys.stdout)
    except ConfigError as exc:
        print(f"casimir-plates: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, CapabilityError) as exc:
        print(f"casimir-plates: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AccuracyError as exc:
        print(f"casimir-plates: accuracy error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
