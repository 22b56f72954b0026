#!/usr/bin/env python3
"""Deterministic transmitted-flux curves against input amplitude.

Writes the three-series io CSV (90:10 at zeta = pi and 2 pi, 60:40 at
2 pi) plus a JSON sidecar.  Pass CLI flags to override, e.g. --output
or --dzeta; run with --help for the list.
"""

import sys

from loopsqueeze.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", "--preset", "fig1_io", *sys.argv[1:]]))
