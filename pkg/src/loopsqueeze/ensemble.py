"""Trajectory ensembles: seeding, initial-state sampling, mergeable statistics.

Reproducibility contract
------------------------
Every trajectory has a global index k and owns three random streams derived
from SeedSequence((base_seed, k)): one for initial/vacuum sampling, one per
interferometer arm for in-fiber noise. Nothing is drawn from a shared stream,
so results are independent of batch size and worker count, and a run over
indices [0, n) is bit-identical to two runs over [0, m) and [m, n) merged.

Merging is kept bit-exact by accumulating per-trajectory statistics in a
binary-counter forest of blocks: a block covers a dyadic index range, two
blocks combine only when they are equal-size aligned neighbours, so any
contiguous assembly order produces the same combine tree. Central moments
combine by the standard pairwise (parallel-axis) update, which also keeps
fourth-moment accumulation free of catastrophic cancellation at large photon
numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .engine import MAX_DIVERGED_FRACTION, PhysicsParams
from .errors import ConfigurationError, InvalidResultError
from .grid import Grid, PPPair, PulseField, spectrum_values
from .interferometer import TopologySpec, run_topology_batch
from .observables import (
    dagger_spectrum_rows,
    momentum_from_flux,
    photon_number_rows,
    spectral_flux_rows,
)

__all__ = [
    "MomentSummary",
    "EnsembleStats",
    "trajectory_streams",
    "wigner_noise_rows",
    "sample_initial",
    "run_ensemble",
    "MODES",
]

MODES = ("deterministic", "wigner", "positive_p")

_LD = np.longdouble


class _Moments:
    """Count-free central-moment block for one scalar observable."""

    __slots__ = ("mean", "m2", "m3", "m4", "minimum", "maximum")

    def __init__(self, mean, m2, m3, m4, minimum, maximum):
        self.mean = mean
        self.m2 = m2
        self.m3 = m3
        self.m4 = m4
        self.minimum = minimum
        self.maximum = maximum

    @classmethod
    def leaf(cls, x: float) -> "_Moments":
        z = _LD(0.0)
        return cls(_LD(x), z, z, z, float(x), float(x))

    @classmethod
    def empty(cls) -> "_Moments":
        z = _LD(0.0)
        return cls(z, z, z, z, np.inf, -np.inf)

    @staticmethod
    def combine(a: "_Moments", na: int, b: "_Moments", nb: int) -> "_Moments":
        if na == 0:
            return b
        if nb == 0:
            return a
        n = _LD(na + nb)
        fa, fb = _LD(na), _LD(nb)
        d = b.mean - a.mean
        mean = a.mean + d * fb / n
        m2 = a.m2 + b.m2 + d * d * fa * fb / n
        m3 = (
            a.m3
            + b.m3
            + d**3 * fa * fb * (fa - fb) / n**2
            + 3.0 * d * (fa * b.m2 - fb * a.m2) / n
        )
        m4 = (
            a.m4
            + b.m4
            + d**4 * fa * fb * (fa * fa - fa * fb + fb * fb) / n**3
            + 6.0 * d * d * (fa * fa * b.m2 + fb * fb * a.m2) / n**2
            + 4.0 * d * (fa * b.m3 - fb * a.m3) / n
        )
        return _Moments(
            mean, m2, m3, m4, min(a.minimum, b.minimum), max(a.maximum, b.maximum)
        )


class _Block:
    """Statistics of trajectories [start, start + size)."""

    __slots__ = ("start", "size", "alive", "photon", "momentum", "field", "spectrum")

    def __init__(self, start, size, alive, photon, momentum, field, spectrum):
        self.start = start
        self.size = size
        self.alive = alive
        self.photon = photon
        self.momentum = momentum
        self.field = field
        self.spectrum = spectrum

    @classmethod
    def leaf(cls, start, n_val, p_val, field_row, flux_row, diverged):
        if diverged:
            return cls(
                start,
                1,
                0,
                _Moments.empty(),
                _Moments.empty(),
                np.zeros(field_row.shape, dtype=np.complex128),
                np.zeros(flux_row.shape, dtype=np.float64),
            )
        return cls(
            start,
            1,
            1,
            _Moments.leaf(n_val),
            _Moments.leaf(p_val),
            field_row.astype(np.complex128, copy=True),
            flux_row.astype(np.float64, copy=True),
        )

    @classmethod
    def combine(cls, left: "_Block", right: "_Block") -> "_Block":
        if left.start + left.size != right.start:
            raise AssertionError("combining non-adjacent statistic blocks")
        return cls(
            left.start,
            left.size + right.size,
            left.alive + right.alive,
            _Moments.combine(left.photon, left.alive, right.photon, right.alive),
            _Moments.combine(left.momentum, left.alive, right.momentum, right.alive),
            left.field + right.field,
            left.spectrum + right.spectrum,
        )


class _Forest:
    """Binary-counter forest over a contiguous, growing index range."""

    __slots__ = ("first", "next", "blocks")

    def __init__(self, first: int):
        self.first = first
        self.next = first
        self.blocks: list[_Block] = []

    def add(self, block: _Block) -> None:
        if block.start != self.next:
            raise AssertionError(
                f"trajectory blocks must arrive in order: got {block.start}, "
                f"expected {self.next}"
            )
        self.blocks.append(block)
        self.next += block.size
        self._carry()

    def _carry(self) -> None:
        blocks = self.blocks
        while len(blocks) >= 2:
            left, right = blocks[-2], blocks[-1]
            if left.size != right.size or left.start % (2 * left.size) != 0:
                break
            blocks[-2] = _Block.combine(left, right)
            blocks.pop()

    def extend(self, other: "_Forest") -> None:
        if other.first != self.next:
            raise ConfigurationError(
                f"cannot merge: runs cover [{self.first}, {self.next}) and "
                f"[{other.first}, {other.next}), which are not contiguous"
            )
        for block in other.blocks:
            self.blocks.append(block)
            self.next += block.size
            self._carry()

    def copy(self) -> "_Forest":
        out = _Forest(self.first)
        out.next = self.next
        out.blocks = list(self.blocks)  # blocks are immutable once built
        return out

    @property
    def count(self) -> int:
        return self.next - self.first

    def total(self) -> _Block | None:
        if not self.blocks:
            return None
        acc = self.blocks[0]
        for block in self.blocks[1:]:
            acc = _Block.combine(acc, block)
        return acc


@dataclass(frozen=True)
class MomentSummary:
    """Raw (uncorrected) sample statistics of one scalar observable."""

    count: int
    mean: float
    variance: float
    se_mean: float
    se_variance: float
    minimum: float
    maximum: float


def _summarize(m: _Moments, alive: int) -> MomentSummary:
    if alive < 2:
        raise InvalidResultError(
            f"statistics need at least 2 surviving trajectories, have {alive}"
        )
    a = _LD(alive)
    m2c = m.m2 / a
    m4c = m.m4 / a
    variance = m.m2 / (a - 1.0)
    se_mean = float(np.sqrt(variance / a))
    se_var_sq = (m4c - m2c * m2c * (a - 3.0) / (a - 1.0)) / a
    if se_var_sq < 0.0:
        se_var_sq = _LD(0.0)
    return MomentSummary(
        count=alive,
        mean=float(m.mean),
        variance=float(variance),
        se_mean=se_mean,
        se_variance=float(np.sqrt(se_var_sq)),
        minimum=m.minimum,
        maximum=m.maximum,
    )


class EnsembleStats:
    """Mergeable raw statistics of one measured port at one distance.

    Everything here is in phase-space (uncorrected) form; the ordering
    corrections that turn these into operator moments live in `observables`.
    """

    def __init__(self, grid: Grid, mode: str, nbar: float, measure_port: str, forest: _Forest):
        self.grid = grid
        self.mode = mode
        self.nbar = nbar
        self.measure_port = measure_port
        self._forest = forest
        self._total = None

    def _totals(self) -> _Block:
        if self._total is None:
            t = self._forest.total()
            if t is None:
                raise InvalidResultError("empty ensemble")
            self._total = t
        return self._total

    @property
    def n_traj(self) -> int:
        return self._forest.count

    @property
    def first_index(self) -> int:
        return self._forest.first

    @property
    def alive(self) -> int:
        return self._totals().alive

    @property
    def diverged(self) -> int:
        t = self._totals()
        return t.size - t.alive

    @property
    def diverged_fraction(self) -> float:
        t = self._totals()
        return (t.size - t.alive) / t.size

    @property
    def valid(self) -> bool:
        return self.diverged_fraction <= MAX_DIVERGED_FRACTION

    @property
    def photon_raw(self) -> MomentSummary:
        t = self._totals()
        return _summarize(t.photon, t.alive)

    @property
    def momentum_raw(self) -> MomentSummary:
        t = self._totals()
        return _summarize(t.momentum, t.alive)

    @property
    def mean_field(self) -> np.ndarray:
        t = self._totals()
        if t.alive == 0:
            raise InvalidResultError("no surviving trajectories")
        return t.field / t.alive

    @property
    def raw_spectrum_mean(self) -> np.ndarray:
        t = self._totals()
        if t.alive == 0:
            raise InvalidResultError("no surviving trajectories")
        return t.spectrum / t.alive

    def merge(self, other: "EnsembleStats") -> "EnsembleStats":
        """Combine with the stats of the next contiguous index range."""
        if self.grid != other.grid:
            raise ConfigurationError("cannot merge: different grids")
        if self.mode != other.mode or self.measure_port != other.measure_port:
            raise ConfigurationError("cannot merge: different mode or measured port")
        if self.nbar != other.nbar:
            raise ConfigurationError("cannot merge: different photon scales")
        forest = self._forest.copy()
        forest.extend(other._forest)
        return EnsembleStats(self.grid, self.mode, self.nbar, self.measure_port, forest)


def trajectory_streams(base_seed: int, index: int) -> tuple[np.random.Generator, ...]:
    """The three independent streams of trajectory `index`: initial, arm a, arm b."""
    if not (isinstance(base_seed, (int, np.integer)) and base_seed >= 0):
        raise ConfigurationError(f"base_seed must be a nonnegative integer, got {base_seed!r}")
    if index < 0:
        raise ConfigurationError(f"trajectory index must be >= 0, got {index}")
    root = np.random.SeedSequence((int(base_seed), int(index)))
    return tuple(np.random.Generator(np.random.Philox(s)) for s in root.spawn(3))


def wigner_noise_rows(
    grid: Grid, nbar: float, rng: np.random.Generator, rows: int = 1
) -> np.ndarray:
    """Vacuum half-photon noise: each quadrature has variance 1/(4 nbar dtau).

    Real parts are drawn before imaginary parts; tests pin this order.
    """
    sigma = np.sqrt(1.0 / (4.0 * nbar * grid.dtau))
    re = rng.standard_normal((rows, grid.n_points))
    im = rng.standard_normal((rows, grid.n_points))
    return sigma * (re + 1j * im)


def sample_initial(
    mean: PulseField,
    mode: str,
    nbar: float,
    rng: np.random.Generator | None = None,
) -> PulseField | PPPair:
    """One initial state for the requested representation.

    deterministic: the mean field itself.  wigner: mean plus vacuum noise.
    positive_p: the coherent doubled pair (phi, conj(phi)), no added noise.
    """
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}, expected one of {MODES}")
    if mode == "deterministic":
        return mean
    if mode == "positive_p":
        return PPPair.coherent(mean)
    if rng is None:
        raise ConfigurationError("wigner sampling requires an rng")
    noisy = mean.samples + wigner_noise_rows(mean.grid, nbar, rng, 1)[0]
    return PulseField(mean.grid, noisy)


def _validated_points(spec: TopologySpec, zeta_points) -> list[float]:
    if zeta_points is None:
        return [spec.zeta]
    points = [float(z) for z in zeta_points]
    if not points:
        raise ConfigurationError("zeta_points must not be empty")
    return points


def run_ensemble(
    input_mean: PulseField,
    spec: TopologySpec,
    mode: str,
    n_traj: int,
    base_seed: int,
    *,
    measure_port: str = "transmitted",
    first_index: int = 0,
    zeta_points: Sequence[float] | None = None,
    batch_size: int = 512,
    n_workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> EnsembleStats | list[EnsembleStats]:
    """Monte-Carlo ensemble through one interferometer topology.

    Trajectories carry global indices [first_index, first_index + n_traj) so
    partial runs with the same base_seed merge bit-exactly. With zeta_points
    a list of EnsembleStats is returned, one per distance, measured in a
    single propagation pass. n_workers is accepted for interface stability;
    execution is serial and results never depend on it.
    """
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}, expected one of {MODES}")
    if not (isinstance(n_traj, (int, np.integer)) and n_traj >= 2):
        raise ConfigurationError(f"n_traj must be an integer >= 2, got {n_traj!r}")
    if measure_port not in ("transmitted", "reflected"):
        raise ConfigurationError(f"measure_port must be transmitted or reflected, got {measure_port!r}")
    if first_index < 0:
        raise ConfigurationError(f"first_index must be >= 0, got {first_index}")
    if batch_size < 1:
        raise ConfigurationError("batch_size must be >= 1")
    if not (isinstance(n_workers, (int, np.integer)) and n_workers >= 1):
        raise ConfigurationError(f"n_workers must be an integer >= 1, got {n_workers!r}")
    if not isinstance(spec.arm_a, PhysicsParams):  # pragma: no cover - TopologySpec guards this
        raise ConfigurationError("arm a must carry fiber physics")

    grid = input_mean.grid
    nbar = spec.arm_a.nbar
    points = _validated_points(spec, zeta_points)
    forests = [_Forest(first_index) for _ in points]
    pp = mode == "positive_p"
    wigner = mode == "wigner"
    base = input_mean.samples

    def measure(i: int, result) -> None:
        port = result.transmitted if measure_port == "transmitted" else result.reflected
        if pp:
            dag = (
                result.transmitted_dagger
                if measure_port == "transmitted"
                else result.reflected_dagger
            )
        else:
            dag = None
        n_vals = photon_number_rows(port, dag, nbar, grid)
        spec_rows = spectrum_values(grid, port)
        dag_spec = dagger_spectrum_rows(grid, dag) if dag is not None else None
        flux = spectral_flux_rows(spec_rows, dag_spec)
        p_vals = momentum_from_flux(flux, nbar, grid)
        forest = forests[i]
        start = forest.next
        for r in range(port.shape[0]):
            forest.add(
                _Block.leaf(
                    start + r,
                    n_vals[r],
                    p_vals[r],
                    port[r],
                    flux[r],
                    bool(result.diverged[r]),
                )
            )

    done = 0
    while done < n_traj:
        rows = min(batch_size, n_traj - done)
        indices = range(first_index + done, first_index + done + rows)
        streams = [trajectory_streams(base_seed, k) for k in indices]
        gens_a = [s[1] for s in streams]
        gens_b = [s[2] for s in streams]

        dagger = None
        vacuum = None
        if wigner:
            # per trajectory: input noise first, then vacuum-port noise
            in_rows = np.stack(
                [base + wigner_noise_rows(grid, nbar, s[0], 1)[0] for s in streams]
            )
            vacuum = np.stack(
                [wigner_noise_rows(grid, nbar, s[0], 1)[0] for s in streams]
            )
        else:
            in_rows = np.broadcast_to(base, (rows, grid.n_points)).copy()
            if pp:
                dagger = np.conj(in_rows)

        run_topology_batch(
            grid,
            spec,
            mode,
            in_rows,
            vacuum,
            gens_a,
            gens_b,
            input_dagger=dagger,
            zeta_points=points,
            measure=measure,
        )
        done += rows
        if progress is not None:
            progress(done, n_traj)

    stats = [
        EnsembleStats(grid, mode, nbar, measure_port, forest) for forest in forests
    ]
    return stats if zeta_points is not None else stats[0]
