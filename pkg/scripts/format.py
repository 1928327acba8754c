#!/usr/bin/env python
"""
Format the code with ruff and drop unused imports (mypy is skipped).

Usage:
    ./scripts/format.py
"""

import os
import sys

CMD = "fast lint --skip-mypy"
TOOL = ("poetry", "pdm", "uv", "")[0]

# run from the directory holding pyproject.toml
os.chdir(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if os.system((TOOL and f"{TOOL} run ") + CMD) != 0:
    sys.exit(1)
