"""Figure assembly and deterministic image output.

Works on matplotlib Figure objects directly (no pyplot state) and strips
volatile metadata from the saved files, so rendering the same inputs twice
gives byte-identical images.
"""

from dataclasses import dataclass
from pathlib import Path

import matplotlib
from matplotlib.figure import Figure

from .schema import SchemaError, read_rows

FORMATS = (".png", ".svg")

# fixed salt: matplotlib otherwise derives SVG element ids from object ids
_RC = {"svg.hashsalt": "plotview"}
_METADATA = {".png": {"Software": "plotview"}, ".svg": {"Date": None}}


@dataclass(frozen=True)
class PlotJob:
    """One rendering task: input CSVs, figure kind, output image path."""

    inputs: tuple[Path, ...]
    kind: str  # io | scanN | scanZ
    output: Path

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        object.__setattr__(self, "output", Path(self.output))


def _ratio_label(ratio: float) -> str:
    keep = int(round(ratio * 100))
    return f"{keep}:{100 - keep}"


def _series_label(ratio: float, fixed_name: str, fixed_value: float) -> str:
    return f"{_ratio_label(ratio)}, {fixed_name} = {fixed_value:g}"


def draw_io(ax, rows: list[dict]) -> None:
    """Overlay one flux curve per (ratio, zeta) series."""
    series = sorted({(row["ratio"], row["zeta"]) for row in rows})
    for ratio, zeta in series:
        pts = sorted(
            (row["N"], row["flux_scaled"])
            for row in rows
            if (row["ratio"], row["zeta"]) == (ratio, zeta)
        )
        ax.plot(
            [p[0] for p in pts],
            [p[1] for p in pts],
            label=_series_label(ratio, "zeta", zeta),
        )
    ax.set_xlabel("input amplitude N")
    ax.set_ylabel("transmitted flux (units of nbar)")
    ax.legend()


def draw_scan(ax, rows: list[dict], x_column: str) -> None:
    """Variance scan with +-1 SE bars; diverged>0 points get open red rings."""
    fixed_name = "zeta" if x_column == "N" else "N"
    series = sorted({(row["ratio"], row[fixed_name]) for row in rows})
    for ratio, fixed in series:
        pts = sorted(
            (row[x_column], row["variance_db"], row["stderr_db"])
            for row in rows
            if (row["ratio"], row[fixed_name]) == (ratio, fixed)
        )
        ax.errorbar(
            [p[0] for p in pts],
            [p[1] for p in pts],
            yerr=[p[2] for p in pts],
            fmt="o-",
            markersize=3,
            capsize=2,
            label=_series_label(ratio, fixed_name, fixed),
        )
    flagged = [row for row in rows if row["diverged"] > 0]
    if flagged:
        ax.scatter(
            [row[x_column] for row in flagged],
            [row["variance_db"] for row in flagged],
            s=90,
            facecolors="none",
            edgecolors="red",
            zorder=5,
            label="diverged > 0",
        )
    ax.axhline(0.0, color="0.6", linewidth=0.8)
    ax.set_xlabel("input amplitude N" if x_column == "N" else "propagation distance zeta")
    ax.set_ylabel("photon-number variance (dB)")
    ax.legend()


def build_figure(kind: str, rows: list[dict]) -> Figure:
    fig = Figure(figsize=(6.4, 4.8))
    ax = fig.add_subplot(111)
    if kind == "io":
        draw_io(ax, rows)
    elif kind == "scanN":
        draw_scan(ax, rows, "N")
    elif kind == "scanZ":
        draw_scan(ax, rows, "zeta")
    else:
        raise SchemaError(f"unknown figure kind {kind!r}")
    fig.tight_layout()
    return fig


def render(job: PlotJob) -> Path:
    """Validate every input, draw the figure, write the image."""
    if not job.inputs:
        raise SchemaError("no input CSVs given")
    suffix = job.output.suffix.lower()
    if suffix not in FORMATS:
        raise SchemaError(
            f"unsupported image format {suffix!r} for {job.output}; use one of {FORMATS}"
        )
    rows = []
    for path in job.inputs:
        rows.extend(read_rows(path, job.kind))
    fig = build_figure(job.kind, rows)
    with matplotlib.rc_context(_RC):
        fig.savefig(job.output, dpi=100, metadata=_METADATA[suffix])
    return job.output
