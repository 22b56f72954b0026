"""Fixed CSV schemas and the strict reader behind every figure kind.

The headers are a contract with the simulator CLI; anything that deviates
is refused with an error naming the offending column, so a silently
reordered or renamed file can never be plotted as if it were valid.
"""

import csv
from pathlib import Path

IO_HEADER = ("ratio", "zeta", "N", "flux_scaled")
SCAN_HEADER = (
    "ratio",
    "zeta",
    "N",
    "mean_photons",
    "variance_db",
    "stderr_db",
    "n_traj",
    "diverged",
)

HEADERS = {"io": IO_HEADER, "scanN": SCAN_HEADER, "scanZ": SCAN_HEADER}

_INT_COLUMNS = ("n_traj", "diverged")


class SchemaError(ValueError):
    """Input CSV does not satisfy the fixed schema."""


def check_header(path: Path, kind: str, header: list[str]) -> tuple[str, ...]:
    expected = HEADERS[kind]
    for i, want in enumerate(expected):
        if i >= len(header):
            raise SchemaError(
                f"{path}: missing column {want!r} (header has {len(header)} of "
                f"{len(expected)} columns expected for {kind})"
            )
        got = header[i].strip()
        if got != want:
            raise SchemaError(
                f"{path}: column {i + 1} is {got!r}, expected {want!r} for {kind}"
            )
    if len(header) > len(expected):
        raise SchemaError(
            f"{path}: unexpected extra column {header[len(expected)].strip()!r} for {kind}"
        )
    return expected


def read_rows(path: str | Path, kind: str) -> list[dict]:
    """Parse one CSV into typed row dicts, enforcing the header for `kind`."""
    if kind not in HEADERS:
        raise SchemaError(f"unknown figure kind {kind!r}; choose from {sorted(HEADERS)}")
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file not found")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty CSV, nothing to plot") from None
        columns = check_header(path, kind, header)
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            if len(raw) != len(columns):
                raise SchemaError(
                    f"{path} line {lineno}: {len(raw)} cells for {len(columns)} columns"
                )
            row = {}
            for name, cell in zip(columns, raw):
                try:
                    row[name] = int(cell) if name in _INT_COLUMNS else float(cell)
                except ValueError:
                    raise SchemaError(
                        f"{path} line {lineno}: cannot parse {name}={cell.strip()!r}"
                    ) from None
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows
