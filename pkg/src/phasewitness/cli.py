"""Command-line interface: single evaluations, sweeps, self-validation.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O
error.  Sweep output is CSV plus a sibling ``<out>.manifest.json``
holding everything needed to reproduce the run bit-exactly; the
``PHASEWITNESS_THREADS`` environment variable caps the worker pool.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import Sequence

import numpy as np

from . import __version__
from . import validate as validate_mod
from .noise import DetectionNoise, ThermalNoise
from .search import (
    MODE_ETA_S,
    MODE_THERMAL,
    SearchConfig,
    SweepResult,
    maximize_bell,
    sweep_eta_s,
    sweep_thermal,
)
from .states import TmsvSpec
from .witness import (
    CLAMP_BOUNDED,
    CLAMP_MODES,
    BellSettings,
    WitnessReport,
    detection_objective,
    thermal_objective,
)

__all__ = ["main"]

THREADS_ENV = "PHASEWITNESS_THREADS"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3

CSV_HEADER = (
    "axis1,axis2,nbar,bell_abs,violated,clamped,s_effective,"
    "a1_re,a1_im,a2_re,a2_im,b1_re,b1_im,b2_re,b2_im"
)


class UsageError(ValueError):
    """Invalid arguments or parameter combinations."""


def _fmt(value: float) -> str:
    return f"{float(value):.17g}"


def _parse_grid(text: str, name: str) -> list[float]:
    """Parse ``lo:hi:count`` (endpoints inclusive) or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(
            f"{name}: expected 'lo:hi:count' or a single number, got {text!r}"
        ) from None
    if count < 1:
        raise UsageError(f"{name}: grid count must be at least 1, got {count}")
    if count == 1 and lo != hi:
        raise UsageError(f"{name}: a 1-point grid needs lo == hi, got {text!r}")
    return [float(v) for v in np.linspace(lo, hi, count)]


def _parse_settings(text: str) -> BellSettings:
    tokens = text.split(",")
    if len(tokens) != 4:
        raise UsageError(
            f"--settings needs 4 comma-separated complex values, got {len(tokens)}"
        )
    try:
        values = [complex(tok.strip()) for tok in tokens]
    except ValueError as exc:
        raise UsageError(f"--settings: {exc}") from None
    return BellSettings(*values)


def _parse_float_list(text: str, name: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from None


def _max_workers() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return None
    try:
        workers = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if workers < 1:
        raise UsageError(f"{THREADS_ENV} must be at least 1, got {workers}")
    return workers


def _report_json(report: WitnessReport) -> dict:
    s = report.settings
    meta = {}
    if report.meta:
        for key, value in report.meta.items():
            meta[key] = float(value) if isinstance(value, float) else value
    return {
        "settings": {
            "a1": [s.a1.real, s.a1.imag],
            "a2": [s.a2.real, s.a2.imag],
            "b1": [s.b1.real, s.b1.imag],
            "b2": [s.b2.real, s.b2.imag],
        },
        "s_effective": report.s_effective.real,
        "bell_value": report.bell_value,
        "bell_abs": report.bell_abs,
        "violated": report.violated,
        "clamped": report.clamped,
        "meta": meta,
    }


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasewitness",
        description="Noise-adaptive entanglement witness evaluation and sweeps.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate the witness once, print JSON")
    ev.add_argument("--state", default="tmsv", choices=["tmsv"])
    ev.add_argument("--xi", type=float, required=True, help="squeezing parameter")
    ev.add_argument("--s", type=float, required=True, help="base order parameter in [-1, 0]")
    ev.add_argument("--noise", default="none", choices=["none", "detection", "thermal"])
    ev.add_argument("--eta", type=float, help="detection efficiency (detection noise)")
    ev.add_argument("--r", type=float, help="interaction strength r (thermal noise)")
    ev.add_argument("--nbar", type=float, default=0.0, help="environment occupation")
    ev.add_argument("--clamp", default=CLAMP_BOUNDED, choices=list(CLAMP_MODES))
    ev.add_argument("--settings", help="a1,a2,b1,b2 as complex literals")
    ev.add_argument("--optimize", action="store_true", help="maximize over settings")
    ev.add_argument("--starts", type=int, default=16)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--box", type=float, default=2.0)

    sw = sub.add_parser("sweep", help="optimize over a parameter grid, write CSV")
    sw.add_argument("--mode", required=True, choices=[MODE_ETA_S, MODE_THERMAL])
    sw.add_argument("--xi", type=float, required=True)
    sw.add_argument("--s", required=True, help="grid lo:hi:count or single value")
    sw.add_argument("--eta", help="eta grid (eta-s mode)")
    sw.add_argument("--r", help="r grid (thermal mode)")
    sw.add_argument("--nbar-list", default="0", help="comma-separated occupations")
    sw.add_argument("--out", required=True, help="CSV output path")
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--starts", type=int, default=16)
    sw.add_argument("--box", type=float, default=2.0)

    va = sub.add_parser("validate", help="run the self-check suites")
    va.add_argument("--quick", action="store_true", help="reduced grids, < 30 s")
    va.add_argument(
        "--suite",
        action="append",
        choices=list(validate_mod.SUITE_NAMES),
        help="run only the named suite (repeatable)",
    )
    return parser


def _cmd_eval(args: argparse.Namespace) -> int:
    if bool(args.settings) == bool(args.optimize):
        raise UsageError("exactly one of --settings or --optimize is required")
    spec = TmsvSpec(args.xi)
    if args.noise == "detection":
        if args.eta is None:
            raise UsageError("--noise detection requires --eta")
        objective = detection_objective(
            spec, args.s, DetectionNoise(args.eta), clamp_mode=args.clamp
        )
    elif args.noise == "thermal":
        if args.r is None:
            raise UsageError("--noise thermal requires --r")
        objective = thermal_objective(
            spec, args.s, ThermalNoise(r=args.r, nbar=args.nbar), clamp_mode=args.clamp
        )
    else:
        objective = detection_objective(
            spec, args.s, DetectionNoise(1.0), clamp_mode=args.clamp
        )
    if args.optimize:
        config = SearchConfig(n_starts=args.starts, box_radius=args.box, seed=args.seed)
        report = maximize_bell(objective, config)
    else:
        report = objective(_parse_settings(args.settings))
    print(json.dumps(_report_json(report), indent=2))
    return EXIT_OK


def _csv_rows(result: SweepResult) -> list[str]:
    rows = [CSV_HEADER]
    for cell in result.cells:
        rep = cell.report
        s = rep.settings
        rows.append(
            ",".join(
                [
                    _fmt(cell.axis1),
                    _fmt(cell.axis2),
                    "" if cell.nbar is None else _fmt(cell.nbar),
                    _fmt(rep.bell_abs),
                    "true" if rep.violated else "false",
                    "true" if rep.clamped else "false",
                    _fmt(rep.s_effective.real),
                    _fmt(s.a1.real),
                    _fmt(s.a1.imag),
                    _fmt(s.a2.real),
                    _fmt(s.a2.imag),
                    _fmt(s.b1.real),
                    _fmt(s.b1.imag),
                    _fmt(s.b2.real),
                    _fmt(s.b2.imag),
                ]
            )
        )
    return rows


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = TmsvSpec(args.xi)
    config = SearchConfig(n_starts=args.starts, box_radius=args.box, seed=args.seed)
    s_grid = _parse_grid(args.s, "--s")
    workers = _max_workers()
    started = time.perf_counter()
    params: dict[str, object] = {
        "mode": args.mode,
        "xi": float(args.xi),
        "s_grid": s_grid,
        "seed": config.seed,
        "n_starts": config.n_starts,
        "box_radius": config.box_radius,
        "ftol": config.ftol,
        "xtol": config.xtol,
        "restrict_real": config.restrict_real,
        "clamp_mode": CLAMP_BOUNDED,
    }
    if args.mode == MODE_ETA_S:
        if args.eta is None:
            raise UsageError("--mode eta-s requires --eta")
        eta_grid = _parse_grid(args.eta, "--eta")
        params["eta_grid"] = eta_grid
        result = sweep_eta_s(spec, eta_grid, s_grid, config, max_workers=workers)
    else:
        if args.r is None:
            raise UsageError("--mode thermal requires --r")
        r_grid = _parse_grid(args.r, "--r")
        nbar_list = _parse_float_list(args.nbar_list, "--nbar-list")
        params["r_grid"] = r_grid
        params["nbar_list"] = nbar_list
        result = sweep_thermal(spec, r_grid, s_grid, nbar_list, config, max_workers=workers)

    rows = _csv_rows(result)
    checks = {
        "grid_valid": True,
        "values_finite": all(math.isfinite(c.report.bell_abs) for c in result.cells),
        "forms_consistent": True,
    }
    manifest = {
        "command": "sweep",
        "version": __version__,
        **params,
        "rows": len(rows) - 1,
        "csv": os.path.basename(args.out),
        "wall_time_s": time.perf_counter() - started,
        "checks": checks,
    }
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(rows) + "\n")
        with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    if not all(checks.values()):
        failed = [k for k, v in checks.items() if not v]
        print(f"error: checks failed: {failed}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"wrote {len(rows) - 1} rows to {args.out}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    results = validate_mod.run_suites(quick=args.quick, names=args.suite)
    print(validate_mod.format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


#: Flags whose values may start with '-' (grids like -1:0:21); they are
#: folded into --flag=value form so argparse does not read them as options.
_GRID_VALUE_FLAGS = ("--s", "--eta", "--r", "--nbar-list")


def _fold_grid_values(argv: Sequence[str]) -> list[str]:
    out: list[str] = []
    tokens = iter(argv)
    for token in tokens:
        if token in _GRID_VALUE_FLAGS:
            value = next(tokens, None)
            out.append(token if value is None else f"{token}={value}")
        else:
            out.append(token)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_fold_grid_values(argv))
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    handlers = {"eval": _cmd_eval, "sweep": _cmd_sweep, "validate": _cmd_validate}
    try:
        return handlers[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
