"""Command line interface.

Subcommands: simulate (run a scenario, emit the time-series CSV),
certificate (print the gain certificate for a scenario), sweep (one run per
value along p / omega-max / k), verify (run the built-in invariant suite).

Exit codes: 0 success, 1 configuration error, 2 invariant or check failure.
Seed precedence: --seed flag, then GYROLESS_SEED, then the config value.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import selfcheck
from .gains import certificate_record, certificate_report
from .harness import (
    ConfigError,
    gnuplot_script,
    load_config,
    resolve_gains,
    run_scenario,
    sweep,
    write_csv,
    write_sweep_csv,
    SWEEP_AXES,
)

SEED_ENV = "GYROLESS_SEED"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gyroless",
        description="Rigid-body rotation simulator and gyro-free angular velocity observer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario")
    sim.add_argument("config", help="scenario JSON file")
    sim.add_argument("--csv", help="write the time series here (default: stdout)")
    sim.add_argument("--gnuplot", help="also write a gnuplot script referencing the CSV")
    sim.add_argument("--seed", type=int, help="override the sensor noise seed")

    cert = sub.add_parser("certificate", help="print the gain certificate for a scenario")
    cert.add_argument("config", help="scenario JSON file")
    cert.add_argument("--json", action="store_true", help="machine-readable output")

    swp = sub.add_parser("sweep", help="run the scenario once per axis value")
    swp.add_argument("config", help="base scenario JSON file")
    swp.add_argument("--axis", required=True, choices=SWEEP_AXES)
    swp.add_argument("--values", required=True, help="comma-separated axis values")
    swp.add_argument("--out", help="write the summary CSV here (default: stdout)")
    swp.add_argument("--seed", type=int, help="override the sensor noise seed")

    sub.add_parser("verify", help="run the built-in invariant suite")
    return parser


def _seed_override(args) -> int | None:
    if getattr(args, "seed", None) is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config, seed_override=_seed_override(args))
    result = run_scenario(cfg)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            write_csv(result, fh)
        summary = {
            "csv": args.csv,
            "samples": len(result.times),
            "decay_rate": result.decay_rate,
            "terminal_error": result.terminal_error,
            "certificate": certificate_record(result.certificate),
        }
        json.dump(summary, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        write_csv(result, sys.stdout)
    if args.gnuplot:
        if not args.csv:
            raise ConfigError("--gnuplot requires --csv")
        with open(args.gnuplot, "w", encoding="utf-8") as fh:
            fh.write(gnuplot_script(args.csv))
    return 0


def _cmd_certificate(args) -> int:
    cfg = load_config(args.config)
    cert = resolve_gains(cfg).certificate
    if args.json:
        json.dump(certificate_record(cert), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        print(certificate_report(cert))
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config, seed_override=_seed_override(args))
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {args.values!r}") from None
    if not values:
        raise ConfigError("--values is empty")
    rows = sweep(cfg, args.axis, values)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_sweep_csv(rows, fh)
    else:
        write_sweep_csv(rows, sys.stdout)
    return 0


def _cmd_verify(_args) -> int:
    return 0 if selfcheck.run_all() else 2


_COMMANDS = {
    "simulate": _cmd_simulate,
    "certificate": _cmd_certificate,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
