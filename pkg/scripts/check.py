#!/usr/bin/env python
"""
Lint with ruff, then type check with mypy (both through `fast check`).
Pass --bandit to also scan the package for security issues.

Nothing is modified; run ./scripts/format.py to auto-fix style issues.

Usage::
    ./scripts/check.py [--bandit]
"""

import os
import sys

CMD = "fast check"
TOOL = ("poetry", "pdm", "")[0]
PACKAGE = "vsa_capacity"

work_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if os.getcwd() != work_dir:
    os.chdir(work_dir)


def run(cmd: str) -> None:
    cmd = f"{TOOL} run {cmd}" if TOOL else cmd
    print("-->", cmd, flush=True)
    if os.system(cmd) != 0:
        sys.exit(1)


if os.system(f"{TOOL} run {CMD}" if TOOL else CMD) != 0:
    print("\033[1m Please run './scripts/format.py' to auto-fix style issues \033[0m")
    sys.exit(1)
if "--bandit" in sys.argv:
    run(f"bandit -r {PACKAGE}")
print("Done.")
