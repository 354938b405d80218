"""Command-line experiment runner.

Subcommands mirror the experiment kinds; the configuration file (or bundled
preset name) supplies the model and numerics, and command-line flags override
selected fields.  Exit codes: 0 success, 1 configuration error, 2 Riccati
blow-up before the horizon, 3 Monte Carlo divergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .experiments import (
    SWEEP_KINDS,
    ConfigError,
    ExperimentConfig,
    available_presets,
    load_config,
    run,
)
from .riccati import RiccatiBlowUpError
from .simulate import SimulationError

_SUBCOMMAND_KINDS = {
    "solve": ("solve",),
    "strategy": ("strategy", "bl13-recovery"),
    "value": ("value",),
    "mc-check": ("mc-check",),
    "sweep": SWEEP_KINDS,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volterra-merton",
        description="Optimal investment in multivariate Volterra volatility models",
        epilog=f"bundled presets: {', '.join(available_presets())}",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "strategy", "value", "mc-check", "sweep"):
        p = sub.add_parser(name, help=f"run a {name} experiment")
        p.add_argument("--config", required=True, help="config file path or preset name")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="simulation seed override")
        p.add_argument("--steps", type=int, default=None, help="time steps override")
        p.add_argument(
            "--format",
            default=None,
            help="comma-separated output formats from csv,svg,json",
        )
    return parser


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    updates = {}
    if args.out is not None:
        updates["out_dir"] = Path(args.out)
    if args.steps is not None:
        if args.steps < 1:
            raise ConfigError(["--steps must be at least 1"])
        updates["n_steps"] = args.steps
    if args.seed is not None:
        updates["sim"] = dataclasses.replace(config.sim, seed=args.seed)
    if args.format is not None:
        formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
        bad = [f for f in formats if f not in ("csv", "svg", "json")]
        if bad:
            raise ConfigError([f"unsupported output formats: {bad}"])
        updates["formats"] = formats
    return config.replaced(**updates) if updates else config


def _error_record(code: int, kind: str, message: str, **extra) -> str:
    record = {"error": {"code": code, "kind": kind, "message": message, **extra}}
    return json.dumps(record, sort_keys=True)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = load_config(args.config)
        allowed = _SUBCOMMAND_KINDS[args.command]
        if config.kind not in allowed:
            raise ConfigError(
                [f"config kind {config.kind!r} cannot run under '{args.command}' "
                 f"(allowed: {', '.join(allowed)})"]
            )
        config = _apply_overrides(config, args)
    except ConfigError as exc:
        print(_error_record(1, "config", str(exc), problems=exc.problems))
        return 1
    try:
        report = run(config)
    except RiccatiBlowUpError as exc:
        print(_error_record(2, "riccati-blowup", str(exc), t_max_estimate=exc.blowup.detected_at))
        return 2
    except SimulationError as exc:
        print(_error_record(3, "mc-divergence", str(exc), path_index=exc.path_index))
        return 3
    except ConfigError as exc:
        print(_error_record(1, "config", str(exc), problems=exc.problems))
        return 1
    print(report.to_json())
    return 0


if __name__ == "__main__":
    sys.exit(main())
