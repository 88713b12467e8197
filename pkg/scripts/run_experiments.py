"""Run every config under configs/ through the CLI and summarize exit codes."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from smallbasis.cli import EXIT_OK, EXIT_VERDICT, main

ROOT = Path(__file__).resolve().parent.parent
# configs whose purpose is to demonstrate a failing verdict
EXPECTED = {"theorem_a_obstructed": EXIT_VERDICT}


def parse_args(argv=None) -> argparse.Namespace:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--configs", type=Path, default=ROOT / "configs")
    p.add_argument("--out", type=Path, default=ROOT / "results")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    return p.parse_args(argv)


def run(args: argparse.Namespace) -> int:
    failures = 0
    for cfg in sorted(args.configs.glob("*.json")):
        argv = ["--config", str(cfg), "--out", str(args.out / cfg.stem), "--jobs", str(args.jobs)]
        if args.seed is not None:
            argv += ["--seed", str(args.seed)]
        code = main(argv)
        want = EXPECTED.get(cfg.stem, EXIT_OK)
        status = "ok" if code == want else "UNEXPECTED"
        failures += code != want
        print(f"{cfg.stem:24s} exit {code} (expected {want}) {status}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(run(parse_args()))
