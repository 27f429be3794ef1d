"""``whlab <experiment> --config FILE [--out DIR] [--seed U64] [--threads N]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

from ..states import NumericalError
from .config import ConfigError, default_toml, load_config
from .registry import REGISTRY
from .runner import resolve_threads, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="whlab", description="wormhole teleportation numerics")
    p.add_argument("experiment", choices=sorted(REGISTRY) + ["list"],
                   help="experiment name, or 'list' to show the registry")
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--out", default="results", help="output root (default: results)")
    p.add_argument("--seed", type=_u64, help="override ensemble.master_seed")
    p.add_argument("--threads", type=int, help="worker processes (default: $WHLAB_THREADS or 1)")
    p.add_argument("--print-config", action="store_true",
                   help="print the registry defaults as TOML and exit")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.experiment == "list":
        for e in REGISTRY.values():
            print(f"{e.name:16s} {e.figure:40s} {e.description}")
        return EXIT_OK
    if args.print_config:
        sys.stdout.write(default_toml(args.experiment))
        return EXIT_OK
    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        threads = resolve_threads(args.threads)
        cfg = load_config(args.experiment, args.config, args.seed)
        path = run_experiment(cfg, args.out, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
