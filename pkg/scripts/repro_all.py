#!/usr/bin/env python3
"""Run every reproduction target and print the per-cell report.

Equivalent to `shmtwin repro all`; kept as a script so the whole battery of
published-value checks is one command during development.
"""

import sys

from shmtwin.cli import main

if __name__ == "__main__":
    sys.exit(main(["repro", "all", "--outdir", "repro_out"]))
