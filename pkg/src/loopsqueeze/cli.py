"""Command-line entry points: run experiment presets, validate configs.

Exit codes: 0 success, 2 configuration error, 3 invalid result (diverged
trajectories above tolerance or degenerate statistics).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .config import (
    FIG1_SERIES,
    ExperimentConfig,
    build_config,
    load_config_file,
    validate_config,
)
from .ensemble import run_ensemble
from .errors import ConfigurationError, InvalidResultError
from .grid import sech_pulse
from .interferometer import loop_topology
from .observables import io_curve, squeezing_db

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


def _fmt(value) -> str:
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def _write_csv(path: Path, header: tuple[str, ...], rows: list[tuple]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(v) for v in row) + "\n")


def _scan_row(ratio, zeta, amplitude, stats) -> tuple:
    result = squeezing_db(stats)
    return (
        ratio,
        zeta,
        amplitude,
        result.mean_photons,
        result.variance_db,
        result.std_error_db,
        result.n_traj,
        result.diverged,
    )


def _run_fig1(config: ExperimentConfig):
    grid = config.grid()
    physics = config.physics()
    amplitudes = config.sweep_amplitudes()
    rows = []
    for ratio, zeta in FIG1_SERIES:
        curve = io_curve(amplitudes, loop_topology(ratio, zeta, physics), grid)
        for n, f in zip(curve.amplitudes, curve.flux_scaled):
            rows.append((ratio, zeta, float(n), float(f)))
    return IO_HEADER, rows, 0, True


def _run_scan_n(config: ExperimentConfig):
    grid = config.grid()
    spec = config.topology()
    rows = []
    diverged = 0
    valid = True
    for n in config.sweep_amplitudes():
        stats = run_ensemble(
            sech_pulse(float(n), grid),
            spec,
            config.mode,
            config.n_traj,
            config.base_seed,
            n_workers=config.workers,
        )
        diverged += stats.diverged
        valid = valid and stats.valid
        rows.append(_scan_row(spec.split_ratio, spec.zeta, float(n), stats))
    return SCAN_HEADER, rows, diverged, valid


def _run_scan_z(config: ExperimentConfig):
    grid = config.grid()
    points = config.sweep_zetas()
    spec = config.topology(zeta=points[-1])
    stats_list = run_ensemble(
        sech_pulse(config.amplitude, grid),
        spec,
        config.mode,
        config.n_traj,
        config.base_seed,
        zeta_points=points,
        n_workers=config.workers,
    )
    rows = []
    valid = True
    for zeta, stats in zip(points, stats_list):
        valid = valid and stats.valid
        rows.append(_scan_row(spec.split_ratio, zeta, config.amplitude, stats))
    return SCAN_HEADER, rows, stats_list[-1].diverged, valid


def _run_single(config: ExperimentConfig):
    grid = config.grid()
    spec = config.topology()
    stats = run_ensemble(
        sech_pulse(config.amplitude, grid),
        spec,
        config.mode,
        config.n_traj,
        config.base_seed,
        n_workers=config.workers,
    )
    row = _scan_row(spec.split_ratio, spec.zeta, config.amplitude, stats)
    return SCAN_HEADER, [row], stats.diverged, stats.valid


_RUNNERS = {
    "fig1_io": _run_fig1,
    "fig2_scanN": _run_scan_n,
    "fig3_scanZ": _run_scan_z,
    "single": _run_single,
}


def run_experiment(config: ExperimentConfig) -> dict:
    """Execute the preset and write <output>.csv and <output>.json."""
    started = time.monotonic()
    header, rows, diverged, valid = _RUNNERS[config.preset](config)
    wall = time.monotonic() - started

    stem = Path(config.output)
    csv_path = stem.with_suffix(".csv")
    _write_csv(csv_path, header, rows)
    meta = {
        "config": config.to_dict(),
        "seed": config.base_seed,
        "diverged": int(diverged),
        "valid": bool(valid),
        "rows": len(rows),
        "wall_time_s": round(wall, 3),
        "version": __version__,
        "csv": csv_path.name,
    }
    json_path = stem.with_suffix(".json")
    json_path.parent.mkdir(parents=True, exist_ok=True)
    with open(json_path, "w") as handle:
        json.dump(meta, handle, indent=2)
        handle.write("\n")
    return meta


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", nargs="?", help="YAML config file (optional)")
    parser.add_argument("--preset", choices=["single", "fig1_io", "fig2_scanN", "fig3_scanZ"])
    parser.add_argument("--mode", choices=["deterministic", "wigner", "positive_p"])
    parser.add_argument("--nbar", type=float)
    parser.add_argument("--n-traj", type=int, dest="n_traj")
    parser.add_argument("--seed", type=int, dest="base_seed")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--amplitude", type=float, help="input pulse height N")
    parser.add_argument("--output", help="output stem (.csv/.json appended)")
    parser.add_argument("--grid-points", type=int, dest="grid_points")
    parser.add_argument("--window", type=float)
    parser.add_argument("--ratio", type=float, dest="split_ratio")
    parser.add_argument("--zeta", type=float)
    parser.add_argument("--phase-shift", type=float, dest="phase_shift")
    parser.add_argument("--kind", choices=["loop", "mz"])
    parser.add_argument("--arm-b", choices=["fiber", "free", "vacuum"], dest="arm_b")
    parser.add_argument("--recombine-ratio", type=float, dest="recombine_ratio")
    parser.add_argument(
        "--dispersion", choices=["anomalous", "normal"], dest="dispersion_sign"
    )
    parser.add_argument("--raman-fraction", type=float, dest="raman_fraction")
    parser.add_argument("--t0-ps", type=float, dest="t0_ps")
    parser.add_argument("--temperature", type=float)
    parser.add_argument("--loss-db-per-km", type=float, dest="loss_db_per_km")
    parser.add_argument("--dzeta", type=float)


_OVERRIDE_NAMES = (
    "preset",
    "mode",
    "nbar",
    "n_traj",
    "base_seed",
    "workers",
    "amplitude",
    "output",
    "grid_points",
    "window",
    "split_ratio",
    "zeta",
    "phase_shift",
    "kind",
    "arm_b",
    "recombine_ratio",
    "dispersion_sign",
    "raman_fraction",
    "t0_ps",
    "temperature",
    "loss_db_per_km",
    "dzeta",
)


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_data = load_config_file(args.config) if args.config else None
    overrides = {name: getattr(args, name) for name in _OVERRIDE_NAMES}
    return build_config(file_data, overrides)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    report = validate_config(config)
    errors = [msg for level, msg in report if level == "error"]
    for level, msg in report:
        print(f"{level}: {msg}", file=sys.stderr)
    if errors:
        return 2
    try:
        meta = run_experiment(config)
    except InvalidResultError as exc:
        print(f"invalid result: {exc}", file=sys.stderr)
        return 3
    print(
        f"wrote {meta['rows']} rows to {Path(config.output).with_suffix('.csv')} "
        f"({meta['wall_time_s']} s)"
    )
    if not meta["valid"]:
        print(
            f"invalid result: {meta['diverged']} diverged trajectories exceed tolerance",
            file=sys.stderr,
        )
        return 3
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    report = validate_config(config)
    for level, msg in report:
        print(f"{level}: {msg}")
    return 2 if any(level == "error" for level, _ in report) else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loopsqueeze",
        description="Quantum noise of solitons in fiber loop interferometers",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a preset and write CSV + JSON results")
    _add_override_flags(run_p)
    run_p.set_defaults(func=_cmd_run)

    val_p = sub.add_parser("validate", help="check a config for feasibility")
    _add_override_flags(val_p)
    val_p.set_defaults(func=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except InvalidResultError as exc:
        print(f"invalid result: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
