#!/usr/bin/env python3
"""Run the acceptance gate and show the per-criterion lines.

Exits nonzero if any criterion fails.
"""

import pathlib
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    sys.exit(
        subprocess.call(
            [sys.executable, "-m", "pytest", "-v", "-s", str(ROOT / "tests" / "test_acceptance.py")]
        )
    )
