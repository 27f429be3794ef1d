"""Run registry experiments through the CLI with the shipped configs.

    python scripts/reproduce.py                       # every experiment, desk-scale configs
    python scripts/reproduce.py --quick mi-curve      # tiny smoke-test configs
    python scripts/reproduce.py --out results --threads 4 eternal lyapunov
"""
import argparse
import sys
import time
from pathlib import Path

from whlab.harness.cli import main as whlab
from whlab.harness.registry import REGISTRY

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("experiments", nargs="*", help="registry names (default: all)")
    p.add_argument("--quick", action="store_true", help="use configs/quick")
    p.add_argument("--out", default="results")
    p.add_argument("--threads", type=int)
    args = p.parse_args(argv)
    unknown = set(args.experiments) - set(REGISTRY)
    if unknown:
        p.error(f"unknown experiments: {sorted(unknown)}")
    root = CONFIGS / "quick" if args.quick else CONFIGS
    status = 0
    for name in args.experiments or sorted(REGISTRY):
        cmd = [name, "--config", str(root / f"{name}.toml"), "--out", args.out]
        if args.threads:
            cmd += ["--threads", str(args.threads)]
        t = time.perf_counter()
        rc = whlab(cmd)
        print(f"{name:16s} exit {rc} in {time.perf_counter() - t:.1f}s", flush=True)
        status = status or rc
    return status


if __name__ == "__main__":
    sys.exit(main())
