"""Beamsplitter algebra and two-arm interferometer topologies.

The asymmetric loop is modeled as two independent waveguides fed by one
splitter and recombined by a second one: split the input against a vacuum
port, propagate each arm, apply the arm-b phase shifter, recombine. The
"transmitted" output is the port that becomes the plain single-arm
propagation of the input as the split ratio approaches 1.

Splitter convention, fixed package-wide: crossing amplitudes pick up +i,

    out_keep  = sqrt(r) a + i sqrt(1-r) b
    out_cross = i sqrt(1-r) a + sqrt(r) b

In the positive-P representation the dagger fields transform with the
conjugated coefficients so that phi_dagger tracks conj(phi) in expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import (
    BatchState,
    PhysicsParams,
    linear_propagate_batch,
    make_prepared,
    propagate_batch,
)
from .errors import ConfigurationError, TrajectoryDiverged
from .grid import Grid, PPPair, PulseField, spectrum_values

__all__ = [
    "FREE_ARM",
    "VACUUM_ARM",
    "TopologySpec",
    "loop_topology",
    "mz_topology",
    "beamsplit",
    "run_topology",
    "run_topology_batch",
    "TopologyBatchResult",
    "interference_flux",
]

FREE_ARM = "free"  # linear dispersion/loss only, no nonlinear medium
VACUUM_ARM = "vacuum"  # no medium at all


@dataclass(frozen=True)
class TopologySpec:
    """Two-arm interferometer description.

    kind "loop" models the asymmetric fiber loop (both directions share the
    same fiber, so arm physics and the two split ratios must coincide); kind
    "mz" is the general Mach-Zehnder where arm_b may be different physics, a
    free linear stretch, or nothing.
    """

    kind: str
    split_ratio: float
    zeta: float
    arm_a: PhysicsParams
    arm_b: PhysicsParams | str
    recombine_ratio: float | None = None
    phase_shift: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("loop", "mz"):
            raise ConfigurationError(f"unknown topology kind {self.kind!r}")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigurationError(f"split ratio must lie in (0, 1), got {self.split_ratio}")
        if self.recombine_ratio is None:
            object.__setattr__(self, "recombine_ratio", self.split_ratio)
        if not 0.0 < self.recombine_ratio < 1.0:
            raise ConfigurationError(f"recombine ratio must lie in (0, 1), got {self.recombine_ratio}")
        if self.zeta < 0:
            raise ConfigurationError("zeta must be >= 0")
        if isinstance(self.arm_b, str):
            if self.arm_b not in (FREE_ARM, VACUUM_ARM):
                raise ConfigurationError(f"arm_b must be physics, {FREE_ARM!r} or {VACUUM_ARM!r}")
            if self.kind == "loop":
                raise ConfigurationError("a loop propagates both directions through the fiber")
        else:
            if self.arm_b.nbar != self.arm_a.nbar:
                raise ConfigurationError("both arms must share one photon-number scale")
        if self.kind == "loop":
            if self.arm_b != self.arm_a:
                raise ConfigurationError("loop arms traverse the same fiber; physics must match")
            if self.recombine_ratio != self.split_ratio:
                raise ConfigurationError("loop reciprocity forces recombine_ratio = split_ratio")


def loop_topology(
    split_ratio: float, zeta: float, physics: PhysicsParams, phase_shift: float = 0.0
) -> TopologySpec:
    """Asymmetric loop: one splitter used twice, identical arm physics."""
    return TopologySpec(
        kind="loop",
        split_ratio=split_ratio,
        zeta=zeta,
        arm_a=physics,
        arm_b=physics,
        phase_shift=phase_shift,
    )


def mz_topology(
    split_ratio: float,
    zeta: float,
    arm_a: PhysicsParams,
    arm_b: PhysicsParams | str = FREE_ARM,
    recombine_ratio: float | None = None,
    phase_shift: float = 0.0,
) -> TopologySpec:
    return TopologySpec(
        kind="mz",
        split_ratio=split_ratio,
        zeta=zeta,
        arm_a=arm_a,
        arm_b=arm_b,
        recombine_ratio=recombine_ratio,
        phase_shift=phase_shift,
    )


def _split_arrays(a: np.ndarray, b: np.ndarray, ratio: float, conjugate: bool = False):
    t = math.sqrt(ratio)
    r = math.sqrt(1.0 - ratio)
    cross = -1j * r if conjugate else 1j * r
    return t * a + cross * b, cross * a + t * b


def beamsplit(phi_a: PulseField, phi_b: PulseField, ratio: float) -> tuple[PulseField, PulseField]:
    """Unitary two-port mixer; `ratio` is the intensity transmission."""
    if phi_a.grid != phi_b.grid:
        raise ConfigurationError("beamsplit inputs live on different grids")
    if not 0.0 < ratio < 1.0:
        raise ConfigurationError(f"split ratio must lie in (0, 1), got {ratio}")
    c, d = _split_arrays(phi_a.samples, phi_b.samples, ratio)
    return PulseField(phi_a.grid, c), PulseField(phi_a.grid, d)


@dataclass
class TopologyBatchResult:
    """Both output ports of a batch topology run, plus the divergence mask."""

    grid: Grid
    transmitted: np.ndarray
    reflected: np.ndarray
    diverged: np.ndarray
    transmitted_dagger: np.ndarray | None = None
    reflected_dagger: np.ndarray | None = None


def run_topology_batch(
    grid: Grid,
    spec: TopologySpec,
    mode: str,
    input_rows: np.ndarray,
    vacuum_rows: np.ndarray | None,
    gens_a: list[np.random.Generator] | None,
    gens_b: list[np.random.Generator] | None,
    input_dagger: np.ndarray | None = None,
    zeta_points: list[float] | None = None,
    measure=None,
):
    """Drive a batch of trajectories through the interferometer.

    input_rows (rows, n) are already-sampled port-a fields; vacuum_rows are the
    port-b fields (None means exact zeros). With zeta_points given, `measure`
    is called as measure(i, TopologyBatchResult) after recombination at each
    requested distance (strictly increasing); the batch result of the last
    point is returned either way.
    """
    pp = mode == "positive_p"
    if vacuum_rows is None:
        vacuum_rows = np.zeros_like(input_rows)
    if pp and input_dagger is None:
        input_dagger = np.conj(input_rows)

    c, d = _split_arrays(input_rows, vacuum_rows, spec.split_ratio)
    cd = dd = None
    if pp:
        cd, dd = _split_arrays(input_dagger, np.conj(vacuum_rows), spec.split_ratio, conjugate=True)
    state_a = BatchState(grid, c, gens_a, dagger=cd)
    state_b = None
    b_is_physics = not isinstance(spec.arm_b, str)
    if b_is_physics:
        state_b = BatchState(grid, d, gens_b, dagger=dd)

    prep_a = make_prepared(grid, spec.arm_a)
    prep_b = make_prepared(grid, spec.arm_b) if b_is_physics else None

    points = [spec.zeta] if zeta_points is None else list(zeta_points)
    if any(z2 <= z1 for z1, z2 in zip(points, points[1:])) or points[0] < 0:
        raise ConfigurationError("zeta_points must be nonnegative and strictly increasing")

    free_b = d if not b_is_physics and spec.arm_b == FREE_ARM else None
    free_b_dag = dd if (free_b is not None and pp) else None
    vac_b = d if not b_is_physics and spec.arm_b == VACUUM_ARM else None
    vac_b_dag = dd if (vac_b is not None and pp) else None

    last = 0.0
    result = None
    for i, z in enumerate(points):
        seg = z - last
        if seg > 0:
            propagate_batch(state_a, seg, spec.arm_a, mode, prep_a)
            if b_is_physics:
                propagate_batch(state_b, seg, spec.arm_b, mode, prep_b)
            elif free_b is not None:
                free_b = linear_propagate_batch(free_b, seg, prep_a)
                if free_b_dag is not None:
                    free_b_dag = linear_propagate_batch(free_b_dag, seg, prep_a, conjugate=True)
        last = z

        if b_is_physics:
            bb, bb_dag, b_div = state_b.samples, state_b.dagger, state_b.diverged
        elif free_b is not None:
            bb, bb_dag, b_div = free_b, free_b_dag, None
        else:
            bb, bb_dag, b_div = vac_b, vac_b_dag, None
        diverged = state_a.diverged.copy()
        if b_div is not None:
            diverged |= b_div

        theta = spec.phase_shift
        b_phase = bb * np.exp(1j * theta) if theta else bb
        t_out, r_out = _split_arrays(state_a.samples, b_phase, spec.recombine_ratio)
        t_dag = r_dag = None
        if pp:
            bd_phase = bb_dag * np.exp(-1j * theta) if theta else bb_dag
            t_dag, r_dag = _split_arrays(state_a.dagger, bd_phase, spec.recombine_ratio, conjugate=True)
        if np.any(diverged):
            for arr in (t_out, r_out, t_dag, r_dag):
                if arr is not None:
                    arr[diverged] = 0.0
        result = TopologyBatchResult(
            grid=grid,
            transmitted=t_out,
            reflected=r_out,
            diverged=diverged,
            transmitted_dagger=t_dag,
            reflected_dagger=r_dag,
        )
        if measure is not None:
            measure(i, result)
    return result


def run_topology(
    state: PulseField | PPPair,
    spec: TopologySpec,
    mode: str = "deterministic",
    rng: np.random.Generator | None = None,
):
    """Single-trajectory topology run; returns (transmitted, reflected).

    The input state is used as given (pre-sampled or mean field); only the
    vacuum port is sampled here, per representation. Wigner and positive-P
    runs with noise need an rng.
    """
    grid = state.grid
    if mode == "positive_p" and isinstance(state, PulseField):
        state = PPPair.coherent(state)
    needs_vacuum_noise = mode == "wigner"
    stochastic_arms = mode == "positive_p" or (
        mode == "wigner"
        and any(
            isinstance(arm, PhysicsParams) and arm.raman is not None and arm.raman.fraction > 0
            for arm in (spec.arm_a, spec.arm_b)
        )
    )
    if (needs_vacuum_noise or stochastic_arms) and rng is None:
        raise ConfigurationError(f"mode {mode!r} on this topology requires an rng")

    vacuum = None
    if needs_vacuum_noise:
        from .ensemble import wigner_noise_rows

        vacuum = wigner_noise_rows(grid, spec.arm_a.nbar, rng, 1)

    if isinstance(state, PPPair):
        rows, dag = state.phi[None, :], state.phi_dagger[None, :]
    else:
        rows, dag = state.samples[None, :], None
    gens = [rng] if rng is not None else None
    result = run_topology_batch(
        grid, spec, mode, rows, vacuum, gens, gens, input_dagger=dag
    )
    if result.diverged[0]:
        raise TrajectoryDiverged("trajectory diverged inside the interferometer")
    if result.transmitted_dagger is not None:
        return (
            PPPair(grid, result.transmitted[0], result.transmitted_dagger[0]),
            PPPair(grid, result.reflected[0], result.reflected_dagger[0]),
        )
    return PulseField(grid, result.transmitted[0]), PulseField(grid, result.reflected[0])


def interference_flux(phi_1: PulseField, phi_2: PulseField) -> np.ndarray:
    """Cross-term spectral flux 2 Im[conj(spec1) spec2], antisymmetric in the arguments."""
    if phi_1.grid != phi_2.grid:
        raise ConfigurationError("interference inputs live on different grids")
    s1 = spectrum_values(phi_1.grid, phi_1.samples)
    s2 = spectrum_values(phi_2.grid, phi_2.samples)
    return 2.0 * np.imag(np.conj(s1) * s2)
