#!/usr/bin/env python3
"""Single squeezing measurement at the default operating point.

90:10 loop, N = 1.5, zeta = 3, Wigner with 10^4 trajectories; prints the
row it writes.  Use --mode positive_p for normally ordered statistics, or
--raman-fraction/--temperature/--loss-db-per-km for a lossy fiber.
"""

import sys

from loopsqueeze.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", "--preset", "single", *sys.argv[1:]]))
