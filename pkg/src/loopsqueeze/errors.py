"""Error types shared across the package."""

from __future__ import annotations

__all__ = ["ConfigurationError", "TrajectoryDiverged", "InvalidResultError"]


class ConfigurationError(ValueError):
    """Bad user-supplied parameter or config file (CLI exit code 2)."""


class TrajectoryDiverged(RuntimeError):
    """A positive-P trajectory exceeded the divergence threshold."""


class InvalidResultError(RuntimeError):
    """Ensemble result unusable: excess divergences or over-subtracted variance (CLI exit code 3)."""
