"""Command-line entry point.

Exit codes: 0 on success, 1 on invalid input or configuration, 2 when a
single ``solve`` is infeasible for the configured latency budget.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .cases import case_report
from .errors import InfeasibleProblem, NoChannelError, ValidationError
from .config import load_config
from .optimizer import solve
from .sim import curve_rows, format_csv, format_jsonl, run_sweep

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("Infinity" if obj > 0 else "-Infinity")
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _emit_json(payload: dict):
    json.dump(_json_safe(payload), sys.stdout, indent=2)
    sys.stdout.write("\n")


def _write_table(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    try:
        sol = solve(cfg.profile, cfg.single_channel(), cfg.power_model, cfg.solver)
    except InfeasibleProblem as exc:
        _emit_json({"status": "infeasible", "l_max": cfg.profile.l_max, "l_required": exc.l_required})
        return EXIT_INFEASIBLE
    _emit_json({"status": "ok", **sol.as_dict()})
    return EXIT_OK


def cmd_cases(args) -> int:
    cfg = load_config(args.config)
    _emit_json(case_report(cfg.profile, cfg.single_channel(), cfg.power_model).as_dict())
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    rows = run_sweep(cfg, workers=args.workers)
    text = format_jsonl(rows) if args.format == "jsonl" else format_csv(rows)
    _write_table(text, args.out)
    return EXIT_OK


def cmd_curve(args) -> int:
    cfg = load_config(args.config)
    rows = curve_rows(args.kind, cfg)
    text = format_jsonl(rows) if args.format == "jsonl" else format_csv(rows)
    _write_table(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="femtoffload",
        description="Minimum-energy partial offloading from a mobile terminal to a femto access point.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance and print the allocation as JSON")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("cases", help="closed-form special-case report as JSON")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_cases)

    p = sub.add_parser("sweep", help="Monte Carlo gain sweep or single-channel latency sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--workers", type=int, default=1, help="worker processes for gain sweeps")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("curve", help="UL energy/rate tables for a single channel")
    p.add_argument("--kind", required=True, choices=("energy-time", "energy-rate", "modes"))
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.set_defaults(func=cmd_curve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, NoChannelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
