"""Batch renderer for the simulator's CSV outputs."""

__version__ = "0.1.0"

from .render import FORMATS, PlotJob, build_figure, render
from .schema import HEADERS, IO_HEADER, SCAN_HEADER, SchemaError, read_rows

__all__ = [
    "FORMATS",
    "HEADERS",
    "IO_HEADER",
    "SCAN_HEADER",
    "PlotJob",
    "SchemaError",
    "build_figure",
    "read_rows",
    "render",
    "__version__",
]
