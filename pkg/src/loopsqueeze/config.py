"""Experiment configuration: YAML schema, presets, and the validation report.

A config file is a YAML mapping with the sections below; every field is
optional and falls back to the active preset's default, and command-line
flags override the file.

    preset: single | fig1_io | fig2_scanN | fig3_scanZ
    mode: deterministic | wigner | positive_p
    nbar: 1.0e8
    n_traj: 10000
    base_seed: 1
    workers: 1
    amplitude: 1.5          # input pulse height N
    output: results/single  # stem; writes <stem>.csv and <stem>.json
    grid:
      n_points: 512
      window: 25.0
    topology:
      kind: loop | mz
      split_ratio: 0.9
      zeta: 3.0
      recombine_ratio: null # mz only; null means split_ratio
      arm_b: fiber | free | vacuum
      phase_shift: 0.0
    physics:
      dispersion_sign: anomalous | normal
      raman_fraction: 0.0   # 0 disables the delayed response
      t0_ps: 0.1
      temperature: 0.0
      loss_db_per_km: 0.0
      dzeta: null           # null: 0.01 capped at 0.01 / max(N)^2
    sweep:
      n_values: [..]        # fig1_io / fig2_scanN axis
      zeta_values: [..]     # fig3_scanZ axis

fig1_io runs its three fixed splitter/distance series and only takes the
amplitude sweep and fiber physics from the config.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .engine import PhysicsParams, default_raman_model
from .errors import ConfigurationError
from .grid import Grid, PhysicalScales
from .interferometer import TopologySpec, loop_topology, mz_topology

PRESETS = ("single", "fig1_io", "fig2_scanN", "fig3_scanZ")

# series of the classical input-output figure: (split_ratio, zeta)
FIG1_SERIES = ((0.9, math.pi), (0.9, 2 * math.pi), (0.6, 2 * math.pi))

_WINDOW_TAIL_BOUND = 0.05  # sech(window/2) above this clips the pulse


@dataclass
class ExperimentConfig:
    preset: str = "single"
    mode: str = "wigner"
    nbar: float = 1.0e8
    n_traj: int = 10000
    base_seed: int = 1
    workers: int = 1
    amplitude: float = 1.5
    output: str = "results/run"
    grid_points: int = 512
    window: float = 25.0
    kind: str = "loop"
    split_ratio: float = 0.9
    zeta: float = 3.0
    recombine_ratio: float | None = None
    arm_b: str = "fiber"
    phase_shift: float = 0.0
    dispersion_sign: str = "anomalous"
    raman_fraction: float = 0.0
    t0_ps: float = 0.1
    temperature: float = 0.0
    loss_db_per_km: float = 0.0
    dzeta: float | None = None
    n_values: list[float] = field(default_factory=list)
    zeta_values: list[float] = field(default_factory=list)

    # ------------------------------------------------------------------
    # serialization

    def to_dict(self) -> dict:
        return {
            "preset": self.preset,
            "mode": self.mode,
            "nbar": self.nbar,
            "n_traj": self.n_traj,
            "base_seed": self.base_seed,
            "workers": self.workers,
            "amplitude": self.amplitude,
            "output": self.output,
            "grid": {"n_points": self.grid_points, "window": self.window},
            "topology": {
                "kind": self.kind,
                "split_ratio": self.split_ratio,
                "zeta": self.zeta,
                "recombine_ratio": self.recombine_ratio,
                "arm_b": self.arm_b,
                "phase_shift": self.phase_shift,
            },
            "physics": {
                "dispersion_sign": self.dispersion_sign,
                "raman_fraction": self.raman_fraction,
                "t0_ps": self.t0_ps,
                "temperature": self.temperature,
                "loss_db_per_km": self.loss_db_per_km,
                "dzeta": self.dzeta,
            },
            "sweep": {
                "n_values": list(self.n_values),
                "zeta_values": list(self.zeta_values),
            },
        }

    # ------------------------------------------------------------------
    # resolution to engine objects

    def sweep_amplitudes(self) -> np.ndarray:
        if self.preset in ("fig1_io", "fig2_scanN"):
            values = self.n_values or _default_n_values(self.preset)
            return np.asarray(values, dtype=float)
        return np.asarray([self.amplitude], dtype=float)

    def sweep_zetas(self) -> list[float]:
        if self.preset == "fig3_scanZ":
            return [float(z) for z in (self.zeta_values or _default_zeta_values())]
        return [float(self.zeta)]

    def max_amplitude(self) -> float:
        return float(np.max(self.sweep_amplitudes()))

    def resolved_dzeta(self) -> float:
        if self.dzeta is not None:
            return float(self.dzeta)
        n = max(self.max_amplitude(), 1.0)
        return 0.01 / n**2

    def physics(self) -> PhysicsParams:
        t0 = self.t0_ps * 1e-12
        needs_scales = self.raman_fraction > 0 or self.loss_db_per_km > 0 or self.temperature > 0
        scales = PhysicalScales.for_photon_scale(t0, self.nbar) if needs_scales else None
        raman = (
            default_raman_model(self.raman_fraction, t0) if self.raman_fraction > 0 else None
        )
        return PhysicsParams(
            nbar=self.nbar,
            dispersion_sign=self.dispersion_sign,
            f=1.0 - self.raman_fraction,
            raman=raman,
            temperature=self.temperature,
            loss_db_per_km=self.loss_db_per_km,
            scales=scales,
            dzeta=self.resolved_dzeta(),
        )

    def grid(self) -> Grid:
        return Grid(self.grid_points, self.window)

    def topology(self, split_ratio: float | None = None, zeta: float | None = None) -> TopologySpec:
        physics = self.physics()
        rho = self.split_ratio if split_ratio is None else split_ratio
        z = self.zeta if zeta is None else zeta
        if self.kind == "loop":
            if self.arm_b != "fiber":
                raise ConfigurationError("a loop cannot carry a free or vacuum arm")
            return loop_topology(rho, z, physics, phase_shift=self.phase_shift)
        arm_b = physics if self.arm_b == "fiber" else self.arm_b
        return mz_topology(
            rho,
            z,
            physics,
            arm_b=arm_b,
            recombine_ratio=self.recombine_ratio,
            phase_shift=self.phase_shift,
        )


def _default_n_values(preset: str) -> list[float]:
    if preset == "fig1_io":
        return [round(x, 10) for x in np.arange(0.0, 2.2005, 0.01)]
    return [round(x, 10) for x in np.arange(0.2, 2.2005, 0.1)]


def _default_zeta_values() -> list[float]:
    step = math.pi / 8
    return [round(k * step, 12) for k in range(1, 17)]


_PRESET_OVERRIDES: dict[str, dict] = {
    "single": {
        "mode": "wigner",
        "output": "results/single",
    },
    "fig1_io": {
        "mode": "deterministic",
        "output": "results/fig1_io",
    },
    "fig2_scanN": {
        "mode": "wigner",
        "zeta": math.pi,
        "n_traj": 1000,
        "output": "results/fig2_scanN",
    },
    "fig3_scanZ": {
        "mode": "wigner",
        "n_traj": 1000,
        "output": "results/fig3_scanZ",
    },
}

_SECTION_FIELDS = {
    "grid": {"n_points": "grid_points", "window": "window"},
    "topology": {
        "kind": "kind",
        "split_ratio": "split_ratio",
        "zeta": "zeta",
        "recombine_ratio": "recombine_ratio",
        "arm_b": "arm_b",
        "phase_shift": "phase_shift",
    },
    "physics": {
        "dispersion_sign": "dispersion_sign",
        "raman_fraction": "raman_fraction",
        "t0_ps": "t0_ps",
        "temperature": "temperature",
        "loss_db_per_km": "loss_db_per_km",
        "dzeta": "dzeta",
    },
    "sweep": {"n_values": "n_values", "zeta_values": "zeta_values"},
}

_TOP_FIELDS = {
    "preset",
    "mode",
    "nbar",
    "n_traj",
    "base_seed",
    "workers",
    "amplitude",
    "output",
}

_INT_FIELDS = {"n_traj", "base_seed", "workers", "grid_points"}
_LIST_FIELDS = {"n_values", "zeta_values"}
_STR_FIELDS = {"preset", "mode", "output", "kind", "arm_b", "dispersion_sign"}


def _as_number(name: str, value) -> float:
    # YAML 1.1 reads "1.0e8" as a string unless the exponent is signed, so
    # numeric-looking strings are accepted here
    if isinstance(value, bool):
        raise ConfigurationError(f"{name} must be a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a number, got {value!r}")


def _flatten(data: dict) -> dict:
    """Nested YAML mapping -> flat field dict, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigurationError("config root must be a mapping")
    flat: dict = {}
    for key, value in data.items():
        if key in _SECTION_FIELDS:
            if value is None:
                continue
            if not isinstance(value, dict):
                raise ConfigurationError(f"section {key!r} must be a mapping")
            known = _SECTION_FIELDS[key]
            for sub, subval in value.items():
                if sub not in known:
                    raise ConfigurationError(f"unknown field {key}.{sub!r}")
                flat[known[sub]] = subval
        elif key in _TOP_FIELDS:
            flat[key] = value
        else:
            raise ConfigurationError(f"unknown field {key!r}")
    return flat


def _coerce(name: str, value):
    if value is None:
        return None
    if name in _STR_FIELDS:
        if not isinstance(value, str):
            raise ConfigurationError(f"{name} must be a string, got {value!r}")
        return value
    if name in _INT_FIELDS:
        number = _as_number(name, value)
        if number != int(number):
            raise ConfigurationError(f"{name} must be an integer, got {value!r}")
        return int(number)
    if name in _LIST_FIELDS:
        if not isinstance(value, (list, tuple)):
            raise ConfigurationError(f"{name} must be a list, got {value!r}")
        return [_as_number(name, v) for v in value]
    return _as_number(name, value)


def build_config(file_data: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Layer preset defaults, then the config file, then explicit overrides."""
    file_flat = _flatten(file_data or {})
    over = dict(overrides or {})
    preset = over.get("preset") or file_flat.get("preset") or "single"
    if preset not in PRESETS:
        raise ConfigurationError(f"unknown preset {preset!r}, expected one of {PRESETS}")

    merged: dict = {"preset": preset}
    merged.update(_PRESET_OVERRIDES[preset])
    merged.update(file_flat)
    merged.update({k: v for k, v in over.items() if v is not None})
    merged["preset"] = preset

    valid_names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    kwargs = {}
    for name, value in merged.items():
        if name not in valid_names:
            raise ConfigurationError(f"unknown field {name!r}")
        coerced = _coerce(name, value)
        if coerced is None and name not in ("dzeta", "recombine_ratio"):
            continue
        kwargs[name] = coerced
    config = ExperimentConfig(**kwargs)
    _basic_checks(config)
    return config


def _basic_checks(config: ExperimentConfig) -> None:
    from .ensemble import MODES

    if config.mode not in MODES:
        raise ConfigurationError(f"unknown mode {config.mode!r}, expected one of {MODES}")
    if config.arm_b not in ("fiber", "free", "vacuum"):
        raise ConfigurationError(f"arm_b must be fiber, free or vacuum, got {config.arm_b!r}")
    if config.preset != "fig1_io" and config.mode != "deterministic" and config.n_traj < 2:
        raise ConfigurationError("stochastic runs need n_traj >= 2")
    if config.t0_ps <= 0:
        raise ConfigurationError("t0_ps must be positive")


def load_config_file(path: str) -> dict:
    """Parse a YAML config; parse failures carry the file location."""
    try:
        with open(path) as handle:
            data = yaml.safe_load(handle)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigurationError(f"cannot parse {path}{where}: {exc.args[0] if exc.args else exc}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config root in {path} must be a mapping")
    return data


# ----------------------------------------------------------------------
# validation report


def validate_config(config: ExperimentConfig) -> list[tuple[str, str]]:
    """Feasibility report as (level, message); levels are 'error' and 'warning'."""
    report: list[tuple[str, str]] = []

    try:
        config.grid()
    except ConfigurationError as exc:
        report.append(("error", str(exc)))

    tail = 1.0 / math.cosh(config.window / 2.0)
    if tail > _WINDOW_TAIL_BOUND:
        report.append(
            (
                "error",
                f"window {config.window} clips the pulse tails "
                f"(edge amplitude {tail:.3f} of peak); widen the window",
            )
        )

    try:
        config.topology()
    except ConfigurationError as exc:
        report.append(("error", str(exc)))

    n_max = config.max_amplitude()
    bound = 0.01 / max(n_max, 1.0) ** 2
    if config.dzeta is not None and config.dzeta > bound * (1 + 1e-12):
        report.append(
            (
                "warning",
                f"dzeta {config.dzeta} exceeds 0.01/N^2 = {bound:.5f} "
                f"for N = {n_max}; expect step-size error",
            )
        )

    if config.mode != "deterministic" and config.n_traj < 1000:
        report.append(
            (
                "warning",
                f"n_traj = {config.n_traj} gives wide error bars; 10^3 or more recommended",
            )
        )

    return report
