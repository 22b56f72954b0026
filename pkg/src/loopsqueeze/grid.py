"""Comoving-frame discretization, pulse construction, and time<->frequency transforms.

All conventions are fixed here and consumed by every other module, never re-derived:

* time samples   ``tau_j = (j - n/2) dtau``, j = 0..n-1, ``dtau = window/n``
* frequencies    ``omega_k = k domega``, k = -n/2..n/2-1, ``domega = 2 pi/window``
* spectrum       ``spec_k = (dtau/sqrt(2 pi)) sum_j phi_j exp(-i omega_k tau_j)``
* measure        ``dnu = domega``, giving the exact discrete Parseval identity
  ``sum_j |phi_j|^2 dtau = sum_k |spec_k|^2 dnu``

Time is measured in units of the pulse width t0 and distance in units of the
dispersion length x0 = t0^2/|k''|; the fundamental soliton is ``sech(tau)``.

The lone unpaired mode at k = -n/2 represents a pure cosine on the grid, so it
carries zero weight in the first-moment array ``omega`` (the grid is then
symmetric: sum omega = 0, as required by the momentum estimator), while
``omega_sq`` keeps its full curvature weight for the dispersion operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "Grid",
    "PulseField",
    "PPPair",
    "SpectralField",
    "PhysicalScales",
    "make_grid",
    "sech_pulse",
    "vacuum_field",
    "to_spectrum",
    "from_spectrum",
]

# standard single-mode silica fiber near 1.55 um
DEFAULT_K2_ABS = 2.0e-26  # |k''| in s^2/m  (20 ps^2/km)
DEFAULT_GROUP_VELOCITY = 2.05e8  # m/s


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform comoving-time grid with its paired spectral representation.

    Parameters
    ----------
    n_points : int
        Number of samples; must be a power of two and >= 64.
    window : float
        Total span of tau in units of t0.
    """

    n_points: int
    window: float
    tau: np.ndarray = field(init=False, repr=False)
    omega: np.ndarray = field(init=False, repr=False)
    omega_sq: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = self.n_points
        if not (isinstance(n, (int, np.integer)) and n >= 64 and (n & (n - 1)) == 0):
            raise ConfigurationError(f"n_points must be a power of two >= 64, got {n!r}")
        if not self.window > 0:
            raise ConfigurationError(f"window must be positive, got {self.window!r}")
        dtau = self.window / n
        k = np.arange(-n // 2, n // 2)
        tau = k * dtau
        omega_full = k * (2.0 * np.pi / self.window)
        omega = omega_full.copy()
        omega[0] = 0.0  # unpaired Nyquist slot: cosine mode, no net first moment
        for name, arr in (("tau", tau), ("omega", omega), ("omega_sq", omega_full**2)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dtau(self) -> float:
        return self.window / self.n_points

    @property
    def domega(self) -> float:
        """Spectral measure dnu: mode spacing 2 pi/window."""
        return 2.0 * np.pi / self.window

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return self.n_points == other.n_points and self.window == other.window

    def __hash__(self) -> int:
        return hash((self.n_points, self.window))


@dataclass(frozen=True, eq=False)
class PulseField:
    """Photon-flux amplitude phi(tau) sampled on a grid (soliton units)."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=np.complex128)
        if samples.shape != (self.grid.n_points,):
            raise ConfigurationError(
                f"samples shape {samples.shape} does not match grid ({self.grid.n_points},)"
            )
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def flux(self) -> float:
        """Scaled photon flux integral |phi|^2 dtau (photons per nbar)."""
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid.dtau)


@dataclass(frozen=True, eq=False)
class PPPair:
    """Doubled field (phi, phi_dagger) used by the positive-P representation.

    phi_dagger is an independent complex field, equal to conj(phi) only in
    expectation; for a coherent initial state the pair starts exactly conjugate.
    """

    grid: Grid
    phi: np.ndarray
    phi_dagger: np.ndarray

    def __post_init__(self) -> None:
        for name in ("phi", "phi_dagger"):
            arr = np.array(getattr(self, name), dtype=np.complex128)
            if arr.shape != (self.grid.n_points,):
                raise ConfigurationError(
                    f"{name} shape {arr.shape} does not match grid ({self.grid.n_points},)"
                )
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def coherent(cls, pulse: PulseField) -> "PPPair":
        return cls(pulse.grid, pulse.samples, np.conj(pulse.samples))

    def flux(self) -> float:
        """Stochastic photon-flux estimate Re sum(phi_dagger phi) dtau."""
        return float(np.real(np.sum(self.phi_dagger * self.phi)) * self.grid.dtau)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Spectral amplitude on the grid's omega axis, module-fixed normalization."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.complex128)
        if values.shape != (self.grid.n_points,):
            raise ConfigurationError(
                f"values shape {values.shape} does not match grid ({self.grid.n_points},)"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def flux(self) -> float:
        """Same quantity as PulseField.flux by Parseval: sum |spec|^2 dnu."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.domega)


@dataclass(frozen=True)
class PhysicalScales:
    """Dimensional scales tying soliton units to laboratory units.

    chi is the nonlinear rate constant entering the photon-number scale
    1/nbar = chi t0 / (|k''| omega'^2).
    """

    t0: float  # pulse width, seconds
    k2_abs: float = DEFAULT_K2_ABS  # |k''|, s^2/m
    group_velocity: float = DEFAULT_GROUP_VELOCITY  # omega', m/s
    chi: float = 1.0

    def __post_init__(self) -> None:
        if self.t0 <= 0 or self.k2_abs <= 0 or self.group_velocity <= 0 or self.chi <= 0:
            raise ConfigurationError("PhysicalScales fields must all be positive")

    @classmethod
    def for_photon_scale(
        cls,
        t0: float,
        nbar: float,
        k2_abs: float = DEFAULT_K2_ABS,
        group_velocity: float = DEFAULT_GROUP_VELOCITY,
    ) -> "PhysicalScales":
        """Choose chi so the derived photon-number scale equals nbar."""
        if nbar <= 0:
            raise ConfigurationError("nbar must be positive")
        chi = k2_abs * group_velocity**2 / (t0 * nbar)
        return cls(t0=t0, k2_abs=k2_abs, group_velocity=group_velocity, chi=chi)

    @property
    def nbar(self) -> float:
        return self.k2_abs * self.group_velocity**2 / (self.chi * self.t0)

    @property
    def x0(self) -> float:
        """Dispersion length in meters; zeta = x/x0."""
        return self.t0**2 / self.k2_abs

    @property
    def soliton_period(self) -> float:
        return 0.5 * np.pi * self.x0


def make_grid(n_points: int, window: float) -> Grid:
    return Grid(n_points=n_points, window=window)


def sech_pulse(amplitude: float, grid: Grid) -> PulseField:
    """N sech(tau) input pulse; amplitude N = 1 is the fundamental soliton."""
    if amplitude < 0:
        raise ConfigurationError(f"pulse amplitude must be >= 0, got {amplitude}")
    return PulseField(grid, amplitude / np.cosh(grid.tau))


def vacuum_field(grid: Grid) -> PulseField:
    return PulseField(grid, np.zeros(grid.n_points, dtype=np.complex128))


def spectrum_values(grid: Grid, samples: np.ndarray) -> np.ndarray:
    """Transform time samples (any leading batch shape) to centered spectral values."""
    shifted = np.fft.ifftshift(samples, axes=-1)
    return np.fft.fftshift(np.fft.fft(shifted, axis=-1), axes=-1) * (
        grid.dtau / np.sqrt(2.0 * np.pi)
    )


def sample_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Inverse of :func:`spectrum_values`."""
    shifted = np.fft.ifftshift(values, axes=-1)
    return np.fft.fftshift(np.fft.ifft(shifted, axis=-1), axes=-1) * (
        grid.n_points * grid.domega / np.sqrt(2.0 * np.pi)
    )


def to_spectrum(pulse: PulseField) -> SpectralField:
    """Unitary-normalized transform; Parseval holds with measure dnu = domega."""
    return SpectralField(pulse.grid, spectrum_values(pulse.grid, pulse.samples))


def from_spectrum(spec: SpectralField) -> PulseField:
    return PulseField(spec.grid, sample_values(spec.grid, spec.values))
