#!/usr/bin/env python3
"""Photon-number variance against input amplitude at fixed loop length.

Sweeps N at zeta = pi on the 90:10 loop (Wigner ensemble) and writes the
scan CSV with per-point standard errors.  Flags override the preset;
--n-traj and --seed are the usual knobs.
"""

import sys

from loopsqueeze.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", "--preset", "fig2_scanN", *sys.argv[1:]]))
