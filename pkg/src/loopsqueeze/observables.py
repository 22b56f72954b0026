"""Estimators with operator-ordering corrections.

Raw per-trajectory values (photon number, momentum, per-mode flux) are plain
phase-space integrals; what turns them into physical operator moments is the
representation-dependent finalization applied to ensemble statistics:

* classical      raw values are the physical ones (noiseless field)
* wigner         symmetric ordering: subtract the half-photon-per-mode vacuum
                 background, M/2 from the mean and M/4 from the variance for
                 photon number (M grid modes), sum(omega_k^2)/4 from the
                 momentum variance (the mean needs nothing: sum(omega_k) = 0)
* positive_p     normal ordering: means are already physical; variances get
                 the shot-noise term restored, + <n> for photon number and
                 + sum(omega_k^2 <n_k>) for momentum

The squeezing figure of merit is 10 log10[Var(n)/<n>]: 0 dB is shot noise,
"X dB below shot noise" prints as -X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ConfigurationError, InvalidResultError
from .grid import Grid, PPPair, PulseField, sech_pulse, spectrum_values
from .interferometer import TopologySpec, run_topology_batch

if TYPE_CHECKING:  # pragma: no cover - type-only, avoids a module cycle
    from .ensemble import EnsembleStats

__all__ = [
    "SqueezingResult",
    "MomentumResult",
    "CorrectedMoments",
    "photon_number",
    "photon_number_rows",
    "momentum",
    "momentum_rows",
    "flux_spectrum_rows",
    "spectral_flux_rows",
    "dagger_spectrum_rows",
    "momentum_from_flux",
    "photon_statistics",
    "squeezing_db",
    "momentum_statistics",
    "mean_spectrum",
    "variance_db_from_moments",
    "io_curve",
    "IOCurve",
    "turning_points",
]


def dagger_spectrum_rows(grid: Grid, dagger_rows: np.ndarray) -> np.ndarray:
    # transform of phi_dagger with the opposite frequency sign, so that it
    # estimates conj(spectrum(phi)) in the ensemble mean
    return np.conj(spectrum_values(grid, np.conj(dagger_rows)))


def photon_number_rows(
    rows: np.ndarray, dagger_rows: np.ndarray | None, nbar: float, grid: Grid
) -> np.ndarray:
    """Raw per-trajectory photon number n_raw (physical photons)."""
    if dagger_rows is None:
        q = np.abs(rows) ** 2
        return nbar * grid.dtau * np.sum(q, axis=-1)
    return nbar * grid.dtau * np.real(np.sum(dagger_rows * rows, axis=-1))


def spectral_flux_rows(
    spec_rows: np.ndarray, dag_spec_rows: np.ndarray | None
) -> np.ndarray:
    """Per-trajectory per-mode flux from already-computed spectra."""
    if dag_spec_rows is None:
        return np.abs(spec_rows) ** 2
    return np.real(dag_spec_rows * spec_rows)


def momentum_from_flux(flux_rows: np.ndarray, nbar: float, grid: Grid) -> np.ndarray:
    """Momentum of per-mode flux rows: nbar dnu sum_k omega_k flux_k."""
    return nbar * grid.domega * np.sum(grid.omega * flux_rows, axis=-1)


def momentum_rows(
    rows: np.ndarray, dagger_rows: np.ndarray | None, nbar: float, grid: Grid
) -> np.ndarray:
    """Raw per-trajectory momentum: photon-weighted spectral first moment, 1/t0 units."""
    spec = spectrum_values(grid, rows)
    dag = None if dagger_rows is None else dagger_spectrum_rows(grid, dagger_rows)
    return momentum_from_flux(spectral_flux_rows(spec, dag), nbar, grid)


def flux_spectrum_rows(
    rows: np.ndarray, dagger_rows: np.ndarray | None, grid: Grid
) -> np.ndarray:
    """Per-trajectory spectral flux |spec|^2 (positive-P: Re[spec_dagger spec])."""
    spec = spectrum_values(grid, rows)
    dag = None if dagger_rows is None else dagger_spectrum_rows(grid, dagger_rows)
    return spectral_flux_rows(spec, dag)


def photon_number(state: PulseField | PPPair, nbar: float) -> float:
    """Single-state raw photon number; ensemble corrections happen at finalize."""
    if isinstance(state, PPPair):
        return float(
            photon_number_rows(state.phi[None, :], state.phi_dagger[None, :], nbar, state.grid)[0]
        )
    return float(photon_number_rows(state.samples[None, :], None, nbar, state.grid)[0])


def momentum(state: PulseField | PPPair, nbar: float) -> float:
    if isinstance(state, PPPair):
        return float(
            momentum_rows(state.phi[None, :], state.phi_dagger[None, :], nbar, state.grid)[0]
        )
    return float(momentum_rows(state.samples[None, :], None, nbar, state.grid)[0])


@dataclass(frozen=True)
class SqueezingResult:
    """Photon statistics of one measured port."""

    mean_photons: float
    variance_db: float
    std_error_db: float
    mode: str
    n_traj: int
    diverged: int = 0


@dataclass(frozen=True)
class MomentumResult:
    """Momentum statistics with the coherent-state baseline."""

    mean: float
    variance: float
    std_error_variance: float
    baseline_variance: float
    ratio_db: float
    std_error_db: float
    mode: str
    n_traj: int


@dataclass(frozen=True)
class CorrectedMoments:
    mean: float
    variance: float
    se_mean: float
    se_variance: float


def _corrections_photon(stats: "EnsembleStats") -> tuple[float, float]:
    m = stats.grid.n_points
    if stats.mode == "wigner":
        return -0.5 * m, -0.25 * m
    return 0.0, 0.0


def photon_statistics(stats: "EnsembleStats") -> CorrectedMoments:
    """Ordering-corrected photon number moments for the measured port."""
    raw = stats.photon_raw
    dmean, dvar = _corrections_photon(stats)
    mean = raw.mean + dmean
    var = raw.variance + dvar
    se_var = raw.se_variance
    if stats.mode == "positive_p":
        # normally ordered variance: restore the shot-noise term
        var = var + mean
        se_var = math.hypot(se_var, raw.se_mean)
    return CorrectedMoments(mean, var, raw.se_mean, se_var)


def variance_db_from_moments(mean: float, variance: float) -> float:
    """Pure dB conversion: Var(n) = <n> maps to 0 (shot noise)."""
    if mean <= 0 or variance <= 0:
        raise InvalidResultError(f"dB undefined for mean={mean}, variance={variance}")
    return 10.0 * math.log10(variance / mean)


def squeezing_db(stats: "EnsembleStats") -> SqueezingResult:
    """Photon-number variance relative to shot noise, in dB, with its standard error."""
    c = photon_statistics(stats)
    if c.mean <= 0:
        raise InvalidResultError(f"mean photon number {c.mean} is not positive")
    if c.variance <= 0:
        raise InvalidResultError(
            f"corrected photon variance {c.variance} is not positive "
            f"(raw {stats.photon_raw.variance}, ordering correction overshot)"
        )
    db = variance_db_from_moments(c.mean, c.variance)
    rel = math.sqrt((c.se_variance / c.variance) ** 2 + (c.se_mean / c.mean) ** 2)
    se_db = 10.0 / math.log(10.0) * rel
    return SqueezingResult(
        mean_photons=c.mean,
        variance_db=db,
        std_error_db=se_db,
        mode=stats.mode,
        n_traj=stats.n_traj,
        diverged=stats.diverged,
    )


def momentum_statistics(stats: "EnsembleStats") -> MomentumResult:
    """Momentum variance against the coherent-state baseline of the same port.

    The baseline uses the ensemble-mean field of the measured port, so a
    coherent state gives ratio 0 dB at zeta = 0 regardless of the split ratio.
    """
    raw = stats.momentum_raw
    grid = stats.grid
    mean = raw.mean
    var = raw.variance
    se_var = raw.se_variance
    if stats.mode == "wigner":
        var = var - 0.25 * np.sum(grid.omega**2)
    elif stats.mode == "positive_p":
        mode_photons = stats.nbar * grid.domega * stats.raw_spectrum_mean
        var = var + float(np.sum(grid.omega**2 * mode_photons))
    mean_spec = spectrum_values(grid, stats.mean_field)
    baseline = float(
        stats.nbar * grid.domega * np.sum(grid.omega**2 * np.abs(mean_spec) ** 2)
    )
    if baseline <= 0 or var <= 0:
        raise InvalidResultError(
            f"momentum ratio undefined: variance {var}, baseline {baseline}"
        )
    ratio_db = 10.0 * math.log10(var / baseline)
    se_db = 10.0 / math.log(10.0) * (se_var / var)
    return MomentumResult(
        mean=mean,
        variance=var,
        std_error_variance=se_var,
        baseline_variance=baseline,
        ratio_db=ratio_db,
        std_error_db=se_db,
        mode=stats.mode,
        n_traj=stats.n_traj,
    )


def mean_spectrum(stats: "EnsembleStats") -> np.ndarray:
    """Ensemble-averaged spectral flux with the Wigner vacuum background removed."""
    out = stats.raw_spectrum_mean.copy()
    if stats.mode == "wigner":
        out -= 1.0 / (2.0 * stats.nbar * stats.grid.domega)
    return out


@dataclass(frozen=True)
class IOCurve:
    amplitudes: np.ndarray
    flux_scaled: np.ndarray
    turning_points: tuple[float, ...]


def turning_points(x: np.ndarray, y: np.ndarray) -> tuple[float, ...]:
    """Interior local extrema located by sign changes of the finite-difference slope."""
    slopes = np.diff(y)
    out = []
    for i in range(len(slopes) - 1):
        if slopes[i] == 0.0:
            continue
        j = i + 1
        while j < len(slopes) and slopes[j] == 0.0:
            j += 1
        if j < len(slopes) and slopes[i] * slopes[j] < 0:
            out.append(float(x[i + 1]))
    return tuple(out)


def io_curve(n_values, spec: TopologySpec, grid: Grid) -> IOCurve:
    """Classical transmitted flux (units of nbar) against input amplitude N."""
    n_values = np.asarray(n_values, dtype=float)
    if np.any(n_values < 0):
        raise ConfigurationError("input amplitudes must be >= 0")
    rows = np.stack([sech_pulse(a, grid).samples for a in n_values])
    result = run_topology_batch(grid, spec, "deterministic", rows, None, None, None)
    flux = np.sum(np.abs(result.transmitted) ** 2, axis=-1) * grid.dtau
    return IOCurve(
        amplitudes=n_values,
        flux_scaled=flux,
        turning_points=turning_points(n_values, flux),
    )
