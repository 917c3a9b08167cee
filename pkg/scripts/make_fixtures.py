#!/usr/bin/env python3
"""Regenerate the bundled instance configs in configs/ from their seeds."""

import json
from pathlib import Path

from detchain.instances import fixture_configs


def main() -> None:
    out_dir = Path(__file__).resolve().parents[1] / "configs"
    out_dir.mkdir(exist_ok=True)
    for name, cfg in fixture_configs().items():
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(cfg, indent=2) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
