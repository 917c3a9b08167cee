#!/usr/bin/env python3
"""Publish the CLI config schema to docs/config_schema.json."""

import json
from pathlib import Path

from detchain.cli import CONFIG_SCHEMA


def main() -> None:
    path = Path(__file__).resolve().parents[1] / "docs" / "config_schema.json"
    path.parent.mkdir(exist_ok=True)
    path.write_text(json.dumps(CONFIG_SCHEMA, indent=2) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
