#!/usr/bin/env python3
"""Solve the bundled periodic MDP instance and print values and policy."""

import sys
import tempfile
from importlib import resources
from pathlib import Path

from periodet.cli import main as cli_main


def main() -> int:
    src = resources.files("periodet.configs").joinpath("instance_three_state_t2.mdp")
    with tempfile.TemporaryDirectory() as tmp:
        instance = Path(tmp) / "instance_three_state_t2.mdp"
        instance.write_text(src.read_text())
        return cli_main(["mdp-solve", str(instance), "--out-dir", "periodet-results"])


if __name__ == "__main__":
    sys.exit(main())
