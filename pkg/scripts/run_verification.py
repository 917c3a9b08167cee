#!/usr/bin/env python3
"""Run the identity checks and oracle cross-checks on every bundled instance.

Equivalent to invoking `detchain check` on all four configs and
`detchain oracle` on the discrete ones; exits nonzero if anything fails.
"""

import sys
from pathlib import Path

from detchain.cli import main as cli_main

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

DISCRETE = ["discrete_m1n2", "discrete_m2n2", "discrete_m3n2"]
ALL = DISCRETE + ["gauss_chain"]


def main() -> int:
    status = 0
    for name in ALL:
        print(f"--- check {name} ---")
        status |= cli_main(["check", "--config", str(CONFIG_DIR / f"{name}.json")])
    for name in DISCRETE:
        print(f"--- oracle {name} ---")
        status |= cli_main(["oracle", "--config", str(CONFIG_DIR / f"{name}.json")])
    return status


if __name__ == "__main__":
    sys.exit(main())
