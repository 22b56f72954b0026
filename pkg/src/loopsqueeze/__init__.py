"""Photon-number and momentum squeezing of fiber solitons in loop interferometers."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import ConfigurationError, InvalidResultError, TrajectoryDiverged
from .grid import (
    Grid,
    PhysicalScales,
    PulseField,
    SpectralField,
    from_spectrum,
    make_grid,
    sech_pulse,
    to_spectrum,
    vacuum_field,
)

__all__ = [
    "__version__",
    "ConfigurationError",
    "InvalidResultError",
    "TrajectoryDiverged",
    "Grid",
    "PhysicalScales",
    "PulseField",
    "SpectralField",
    "from_spectrum",
    "make_grid",
    "sech_pulse",
    "to_spectrum",
    "vacuum_field",
]
