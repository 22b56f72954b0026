#!/usr/bin/env python3
"""Photon-number variance along the loop at fixed input amplitude.

Measures the Wigner ensemble at checkpoints zeta = k pi / 8 up to 2 pi
(one stochastic run, measured in passing) and writes the scan CSV.
"""

import sys

from loopsqueeze.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", "--preset", "fig3_scanZ", *sys.argv[1:]]))
