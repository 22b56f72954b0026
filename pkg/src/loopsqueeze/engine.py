"""Split-step spectral integrator for the stochastic soliton propagation equation.

Propagates the scaled field phi(zeta, tau) under dispersion, instantaneous Kerr
(fraction f), a delayed Raman response (fraction 1-f) with its thermal/vacuum
phonon noise, linear loss, and (positive-P only) the multiplicative sqrt(i)
electronic noise. Strang composition: linear half step, full nonlinear step,
linear half step; adjacent linear half steps are merged inside a segment, and
the final step is shortened so the target distance is landed on exactly.

Representations:

* deterministic - noiseless classical field
* wigner        - classical evolution plus phonon noise; quantum noise enters
                  through the sampled initial conditions (see ensemble module)
* positive_p    - doubled (phi, phi_dagger) pair with independent sqrt(+/-i)
                  electronic noises and a common phonon field
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import hbar, k as k_boltzmann

from .errors import ConfigurationError, TrajectoryDiverged
from .grid import Grid, PhysicalScales, PPPair, PulseField

__all__ = [
    "RamanOscillator",
    "RamanModel",
    "RamanResponse",
    "PhysicsParams",
    "NoiseDraws",
    "BatchState",
    "default_raman_model",
    "build_raman_response",
    "phonon_spectral_density",
    "sample_phonon_noise",
    "electronic_noise_sigma",
    "linear_half_step",
    "nonlinear_step",
    "propagate",
    "propagate_batch",
    "make_prepared",
]

SQRT_I = np.exp(0.25j * np.pi)  # sqrt(i), principal branch

# silica Raman response constants (damped-sine fit): 12.2 fs oscillation
# time scale, 32 fs damping time; gain peak lands near 13 THz
SILICA_OSC_TIME = 12.2e-15
SILICA_DAMP_TIME = 32.0e-15

DIVERGENCE_FACTOR = 1.0e6  # trajectory flagged when max|sample| exceeds this x initial peak
MAX_DIVERGED_FRACTION = 1.0e-3


@dataclass(frozen=True)
class RamanOscillator:
    """One damped-sine component strength*exp(-damping*tau)*sin(center*tau)."""

    strength: float
    center_frequency: float  # angular, 1/t0 units
    damping: float  # 1/t0 units

    def __post_init__(self) -> None:
        if self.strength < 0 or self.center_frequency <= 0 or self.damping <= 0:
            raise ConfigurationError(f"bad Raman oscillator {self}")


@dataclass(frozen=True)
class RamanModel:
    """Causal delayed-response model; total weight `fraction` = 1 - f."""

    oscillators: tuple[RamanOscillator, ...]
    fraction: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.fraction < 1.0:
            raise ConfigurationError(f"Raman fraction must lie in [0, 1), got {self.fraction}")
        object.__setattr__(self, "oscillators", tuple(self.oscillators))
        if self.fraction > 0 and sum(o.strength for o in self.oscillators) <= 0:
            raise ConfigurationError("Raman normalization failure: all strengths zero")


def default_raman_model(fraction: float = 0.19, t0: float = 1.0e-13) -> RamanModel:
    """Single-oscillator silica fit in scaled units for pulse width t0 (seconds)."""
    if fraction == 0.0:
        return RamanModel(oscillators=(), fraction=0.0)
    center = t0 / SILICA_OSC_TIME
    damping = t0 / SILICA_DAMP_TIME
    # continuum normalization; the sampled kernel is rescaled exactly per grid
    strength = fraction * (damping**2 + center**2) / center
    return RamanModel(
        oscillators=(RamanOscillator(strength, center, damping),), fraction=fraction
    )


@dataclass(frozen=True)
class PhysicsParams:
    """Per-arm propagation physics in scaled units."""

    nbar: float
    dispersion_sign: str = "anomalous"  # or "normal"
    f: float = 1.0  # instantaneous (electronic) fraction of the nonlinearity
    raman: RamanModel | None = None
    temperature: float = 0.0  # kelvin, phonon bath
    loss_db_per_km: float = 0.0
    scales: PhysicalScales | None = None
    dzeta: float = 0.01

    def __post_init__(self) -> None:
        if self.dispersion_sign not in ("anomalous", "normal"):
            raise ConfigurationError(f"unknown dispersion_sign {self.dispersion_sign!r}")
        if not 0.0 < self.f <= 1.0:
            raise ConfigurationError(f"electronic fraction must lie in (0, 1], got {self.f}")
        if self.raman is None and self.f != 1.0:
            raise ConfigurationError("without a Raman model the electronic fraction must be 1")
        if self.raman is not None and abs(self.raman.fraction - (1.0 - self.f)) > 1e-9:
            raise ConfigurationError(
                f"Raman fraction {self.raman.fraction} inconsistent with f={self.f}"
            )
        if self.nbar <= 0:
            raise ConfigurationError("nbar must be positive")
        if self.temperature < 0:
            raise ConfigurationError("temperature must be >= 0")
        if self.loss_db_per_km < 0:
            raise ConfigurationError("loss must be >= 0")
        if self.dzeta <= 0:
            raise ConfigurationError("dzeta must be positive")
        if self.scales is None:
            object.__setattr__(
                self, "scales", PhysicalScales.for_photon_scale(t0=1.0e-13, nbar=self.nbar)
            )
        elif abs(self.scales.nbar / self.nbar - 1.0) > 1e-9:
            raise ConfigurationError(
                f"scales imply nbar={self.scales.nbar:.6g}, params say {self.nbar:.6g}"
            )

    @property
    def alpha_scaled(self) -> float:
        """Flux loss rate per unit zeta: flux(zeta) = flux(0) exp(-alpha zeta)."""
        per_meter = self.loss_db_per_km * math.log(10.0) / 10.0 / 1000.0
        return per_meter * self.scales.x0


@dataclass(frozen=True, eq=False)
class RamanResponse:
    """Sampled causal kernel h(tau_j) plus cached circular-convolution spectra.

    The sampled kernel is rescaled so that dtau * sum(kernel) equals the model
    fraction exactly; plain rectangle sums of the continuum formula miss by
    over a percent on coarse grids.
    """

    grid: Grid
    model: RamanModel
    kernel: np.ndarray = field(init=False, repr=False)
    scale: float = field(init=False)
    conv_rfft: np.ndarray = field(init=False, repr=False)
    conv_full: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        g, m = self.grid, self.model
        raw = np.zeros(g.n_points)
        if m.fraction > 0:
            tau = g.tau
            pos = tau > 0
            for osc in m.oscillators:
                raw[pos] += (
                    osc.strength
                    * np.exp(-osc.damping * tau[pos])
                    * np.sin(osc.center_frequency * tau[pos])
                )
            slowest = min(o.damping for o in m.oscillators)
            if math.exp(-slowest * g.window / 2.0) > 1e-6:
                raise ConfigurationError(
                    "Raman kernel does not decay inside the grid window; enlarge window"
                )
            total = float(np.sum(raw)) * g.dtau
            if total <= 0:
                raise ConfigurationError("Raman normalization failure on this grid")
            scale = m.fraction / total
        else:
            scale = 0.0
        kernel = raw * scale
        kernel.setflags(write=False)
        # wrap layout: ifft(fft(q) * conv_full) is then the periodic convolution
        # with q and the result sharing whatever cyclic origin q uses
        unshifted = np.fft.ifftshift(kernel)
        conv_rfft = np.fft.rfft(unshifted) * g.dtau
        conv_full = np.fft.fft(unshifted) * g.dtau
        for name, val in (
            ("kernel", kernel),
            ("scale", scale),
            ("conv_rfft", conv_rfft),
            ("conv_full", conv_full),
        ):
            object.__setattr__(self, name, val)

    def response_spectrum(self, omega: np.ndarray) -> np.ndarray:
        """Analytic integral of h(tau) exp(-i omega tau) dtau, renormalized."""
        omega = np.asarray(omega, dtype=float)
        out = np.zeros(omega.shape, dtype=np.complex128)
        for osc in self.model.oscillators:
            out += osc.strength * osc.center_frequency / (
                (osc.damping + 1j * omega) ** 2 + osc.center_frequency**2
            )
        return out * self.scale

    def gain_slope_at_zero(self) -> float:
        """|d Im h~ / d omega| at omega = 0; sets the thermal noise floor."""
        s = 0.0
        for osc in self.model.oscillators:
            s += (
                2.0
                * osc.strength
                * osc.damping
                * osc.center_frequency
                / (osc.damping**2 + osc.center_frequency**2) ** 2
            )
        return abs(s) * self.scale


def build_raman_response(model: RamanModel, grid: Grid) -> RamanResponse:
    return RamanResponse(grid=grid, model=model)


def phonon_spectral_density(
    response: RamanResponse,
    omega: np.ndarray,
    temperature: float,
    nbar: float,
    t0: float,
) -> np.ndarray:
    """Phonon noise density S(omega) = (|Im h~(omega)|/nbar)(n_th(|omega|, T) + 1/2).

    omega is in scaled 1/t0 units; the Bose occupation uses the physical
    frequency omega/t0. The omega = 0 entry takes its finite classical limit
    |d Im h~/d omega|(0) * kT t0/hbar (zero at T = 0).
    """
    if temperature < 0:
        raise ConfigurationError("temperature must be >= 0")
    omega = np.asarray(omega, dtype=float)
    gain = np.abs(response.response_spectrum(omega).imag)
    zero = omega == 0.0
    if temperature == 0.0:
        return np.where(zero, 0.0, gain * 0.5 / nbar)
    x = hbar * np.abs(np.where(zero, 1.0, omega)) / t0 / (k_boltzmann * temperature)
    occ = 1.0 / np.expm1(x) + 0.5
    limit = response.gain_slope_at_zero() * k_boltzmann * temperature * t0 / hbar
    return np.where(zero, limit / nbar, gain * occ / nbar)


def sample_phonon_noise(
    model: RamanModel | RamanResponse,
    grid: Grid,
    temperature: float,
    nbar: float,
    rng: np.random.Generator,
    t0: float = 1.0e-13,
    dzeta: float = 0.01,
) -> np.ndarray:
    """One per-step draw of the real phonon noise field Gamma_v(tau).

    Stationary in tau with density S(omega), delta correlated in zeta, so the
    per-step sample variance carries a 1/dzeta factor.
    """
    response = model if isinstance(model, RamanResponse) else build_raman_response(model, grid)
    if response.model.fraction == 0.0:
        return np.zeros(grid.n_points)
    n = grid.n_points
    omega_r = np.arange(n // 2 + 1) * grid.domega
    filt = np.sqrt(phonon_spectral_density(response, omega_r, temperature, nbar, t0))
    white = rng.standard_normal(n) / math.sqrt(grid.dtau * dzeta)
    return np.fft.irfft(np.fft.rfft(white) * filt, n)


@dataclass(frozen=True)
class NoiseDraws:
    """Per-step noise fields for one nonlinear step (None = absent)."""

    gamma_v: np.ndarray | None = None
    gamma_e: np.ndarray | None = None
    gamma_e_dagger: np.ndarray | None = None


def electronic_noise_sigma(params: PhysicsParams, grid: Grid, dzeta: float | None = None) -> float:
    """Per-sample standard deviation of the electronic noise for one step."""
    dz = params.dzeta if dzeta is None else dzeta
    return math.sqrt(params.f / (params.nbar * grid.dtau * dz))


# ---------------------------------------------------------------------------
# batched propagation. Batch arrays are (rows, n_points) in centered tau order
# at the API boundary; the stepping loop works in fft (wrapped) order, shifting
# once on entry and once on exit per segment.


class _Prepared:
    """Spectral multipliers and noise filters for one (grid, params) pair."""

    def __init__(self, grid: Grid, params: PhysicsParams):
        self.grid = grid
        self.params = params
        omega_sq = np.fft.ifftshift(grid.omega_sq)
        curvature = omega_sq if params.dispersion_sign == "anomalous" else -omega_sq
        # exponent rate of the linear step per unit propagated length, fft layout
        self.lin_rate = -0.5j * (1.0 + curvature) - 0.5 * params.alpha_scaled
        self._lin_cache: dict[float, np.ndarray] = {}
        self.response: RamanResponse | None = None
        self.phonon_filt: np.ndarray | None = None
        if params.raman is not None and params.raman.fraction > 0:
            self.response = build_raman_response(params.raman, grid)
            omega_r = np.arange(grid.n_points // 2 + 1) * grid.domega
            self.phonon_filt = np.sqrt(
                phonon_spectral_density(
                    self.response, omega_r, params.temperature, params.nbar, params.scales.t0
                )
            )

    def lin_mult(self, length: float) -> np.ndarray:
        out = self._lin_cache.get(length)
        if out is None:
            out = np.exp(self.lin_rate * length)
            self._lin_cache[length] = out
        return out


def make_prepared(grid: Grid, params: PhysicsParams) -> _Prepared:
    """Build the cached spectral operator set that batch calls thread through."""
    return _Prepared(grid, params)


class BatchState:
    """Mutable batch of trajectory fields propagating together.

    samples/dagger: (rows, n_points) complex in centered tau order. gens holds
    one Generator per row, consumed in a fixed order each step (phonon white
    noise first, then the two electronic draws). Diverged rows are zeroed and
    masked, never revived.
    """

    def __init__(
        self,
        grid: Grid,
        samples: np.ndarray,
        gens: list[np.random.Generator] | None = None,
        dagger: np.ndarray | None = None,
    ):
        self.grid = grid
        self.samples = np.array(samples, dtype=np.complex128, order="C")
        if self.samples.ndim != 2 or self.samples.shape[1] != grid.n_points:
            raise ConfigurationError("batch samples must be (rows, n_points)")
        self.dagger = None if dagger is None else np.array(dagger, dtype=np.complex128, order="C")
        if self.dagger is not None and self.dagger.shape != self.samples.shape:
            raise ConfigurationError("dagger batch shape must match samples")
        self.gens = gens
        peak = np.abs(self.samples).max(axis=1)
        if self.dagger is not None:
            peak = np.maximum(peak, np.abs(self.dagger).max(axis=1))
        self.peak0 = peak
        self.diverged = np.zeros(self.samples.shape[0], dtype=bool)


def _draw_rows(gens: list[np.random.Generator], rows: int, n: int) -> np.ndarray:
    out = np.empty((rows, n))
    for r in range(rows):
        out[r] = gens[r].standard_normal(n)
    return out


def _nonlinear_exponents(
    prep: _Prepared,
    a: np.ndarray,
    b: np.ndarray | None,
    gens: list[np.random.Generator] | None,
    mode: str,
    dz: float,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Exponents of the pointwise nonlinear map over one step of length dz."""
    p = prep.params
    q = np.abs(a) ** 2 if b is None else b * a
    arg = p.f * q if p.f != 1.0 else q
    if prep.response is not None:
        if b is None:
            conv = np.fft.irfft(
                np.fft.rfft(q, axis=-1) * prep.response.conv_rfft, q.shape[-1], axis=-1
            )
        else:
            conv = np.fft.ifft(np.fft.fft(q, axis=-1) * prep.response.conv_full, axis=-1)
        arg = arg + conv
    if prep.phonon_filt is not None and mode != "deterministic":
        rows, n = a.shape
        white = _draw_rows(gens, rows, n)
        white *= 1.0 / math.sqrt(prep.grid.dtau * dz)
        arg = arg + np.fft.irfft(np.fft.rfft(white, axis=-1) * prep.phonon_filt, n, axis=-1)
    if b is None:
        return 1j * dz * arg, None
    exp_phi = 1j * dz * arg
    exp_dag = -1j * dz * arg
    sigma = math.sqrt(p.f / (p.nbar * prep.grid.dtau * dz))
    rows, n = a.shape
    exp_phi = exp_phi + (SQRT_I * sigma * dz) * _draw_rows(gens, rows, n)
    exp_dag = exp_dag + (np.conj(SQRT_I) * sigma * dz) * _draw_rows(gens, rows, n)
    return exp_phi, exp_dag


def _step_sizes(zeta: float, dz: float) -> list[float]:
    n_steps = max(1, math.ceil(zeta / dz - 1e-12))
    last = zeta - dz * (n_steps - 1)
    return [dz] * (n_steps - 1) + [last]


def propagate_batch(
    state: BatchState,
    zeta: float,
    params: PhysicsParams,
    mode: str = "deterministic",
    prep: _Prepared | None = None,
) -> BatchState:
    """Advance every live row of the batch by zeta, mutating state in place."""
    if mode not in ("deterministic", "wigner", "positive_p"):
        raise ConfigurationError(f"unknown mode {mode!r}")
    if zeta < 0:
        raise ConfigurationError("zeta must be >= 0")
    if (mode == "positive_p") != (state.dagger is not None):
        raise ConfigurationError("positive_p mode requires a doubled-pair batch, others a plain one")
    if zeta == 0.0:
        return state
    if prep is None:
        prep = _Prepared(state.grid, params)
    pp = state.dagger is not None
    needs_rng = pp or (prep.phonon_filt is not None and mode != "deterministic")
    if needs_rng and (state.gens is None or len(state.gens) < state.samples.shape[0]):
        raise ConfigurationError("stochastic propagation requires one generator per row")

    sizes = _step_sizes(zeta, params.dzeta)
    fft, ifft = np.fft.fft, np.fft.ifft
    half0 = prep.lin_mult(sizes[0] / 2.0)
    a = ifft(fft(np.fft.ifftshift(state.samples, axes=-1), axis=-1) * half0, axis=-1)
    b = None
    if pp:
        b = ifft(fft(np.fft.ifftshift(state.dagger, axes=-1), axis=-1) * np.conj(half0), axis=-1)
    with np.errstate(over="ignore", invalid="ignore"):
        for i, h in enumerate(sizes):
            exp_phi, exp_dag = _nonlinear_exponents(prep, a, b, state.gens, mode, h)
            a *= np.exp(exp_phi)
            stretch = (h + sizes[i + 1]) / 2.0 if i + 1 < len(sizes) else h / 2.0
            m = prep.lin_mult(stretch)
            a = ifft(fft(a, axis=-1) * m, axis=-1)
            if pp:
                b *= np.exp(exp_dag)
                b = ifft(fft(b, axis=-1) * np.conj(m), axis=-1)
                # divergence scan; flagged rows are re-zeroed every step since
                # 0 * exp(overflowed draw) would otherwise reintroduce NaN
                mx = np.maximum(np.abs(a).max(axis=1), np.abs(b).max(axis=1))
                state.diverged |= ~np.isfinite(mx) | (mx > DIVERGENCE_FACTOR * state.peak0)
                if np.any(state.diverged):
                    a[state.diverged] = 0.0
                    b[state.diverged] = 0.0
    state.samples = np.fft.fftshift(a, axes=-1)
    if pp:
        state.dagger = np.fft.fftshift(b, axes=-1)
    return state


def linear_propagate_batch(
    samples: np.ndarray, zeta: float, prep: _Prepared, conjugate: bool = False
) -> np.ndarray:
    """Dispersion/loss-only evolution over a whole stretch in one spectral multiply.

    conjugate=True applies the phase-conjugated multiplier (same loss), which
    is how a positive-P dagger field rides through a linear stretch.
    """
    if zeta == 0.0:
        return samples
    mult = prep.lin_mult(zeta)
    if conjugate:
        mult = np.conj(mult)
    shifted = np.fft.ifftshift(samples, axes=-1)
    out = np.fft.ifft(np.fft.fft(shifted, axis=-1) * mult, axis=-1)
    return np.fft.fftshift(out, axes=-1)


# ---------------------------------------------------------------------------
# single-trajectory public operations


def linear_half_step(pulse: PulseField, half_dzeta: float, params: PhysicsParams) -> PulseField:
    """Spectral multiply exp[(-(i/2)(1 + curv) - alpha/2) h]; curv = +/- omega^2."""
    prep = _Prepared(pulse.grid, params)
    out = linear_propagate_batch(pulse.samples[None, :], half_dzeta, prep)[0]
    return PulseField(pulse.grid, out)


def nonlinear_step(
    pulse: PulseField | PPPair,
    dzeta: float,
    params: PhysicsParams,
    noise: NoiseDraws | None = None,
) -> PulseField | PPPair:
    """Pointwise exponential nonlinear map for one full step, explicit noise fields."""
    noise = noise or NoiseDraws()
    grid = pulse.grid
    prep = _Prepared(grid, params)
    doubled = isinstance(pulse, PPPair)
    q = (pulse.phi_dagger * pulse.phi) if doubled else np.abs(pulse.samples) ** 2
    arg = params.f * q
    if prep.response is not None:
        if doubled:
            arg = arg + np.fft.ifft(np.fft.fft(q) * prep.response.conv_full)
        else:
            arg = arg + np.fft.irfft(np.fft.rfft(q) * prep.response.conv_rfft, grid.n_points)
    if noise.gamma_v is not None:
        arg = arg + noise.gamma_v
    if doubled:
        exp_phi = 1j * dzeta * arg
        exp_dag = -1j * dzeta * arg
        if noise.gamma_e is not None:
            exp_phi = exp_phi + SQRT_I * dzeta * noise.gamma_e
        if noise.gamma_e_dagger is not None:
            exp_dag = exp_dag + np.conj(SQRT_I) * dzeta * noise.gamma_e_dagger
        phi = pulse.phi * np.exp(exp_phi)
        dag = pulse.phi_dagger * np.exp(exp_dag)
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(dag))):
            raise TrajectoryDiverged("non-finite samples in nonlinear step")
        return PPPair(grid, phi, dag)
    return PulseField(grid, pulse.samples * np.exp(1j * dzeta * arg))


def propagate(
    state: PulseField | PPPair,
    zeta: float,
    params: PhysicsParams,
    mode: str = "deterministic",
    rng: np.random.Generator | None = None,
) -> PulseField | PPPair:
    """Propagate a single trajectory by zeta. Raises TrajectoryDiverged on blowup."""
    grid = state.grid
    if mode == "positive_p" and isinstance(state, PulseField):
        state = PPPair.coherent(state)
    prep = _Prepared(grid, params)
    needs_rng = mode == "positive_p" or (
        mode == "wigner" and params.raman is not None and params.raman.fraction > 0
    )
    gens = None
    if needs_rng:
        if rng is None:
            raise ConfigurationError(f"mode {mode!r} with these params requires an rng")
        gens = [rng]
    if isinstance(state, PPPair):
        batch = BatchState(grid, state.phi[None, :], gens, dagger=state.phi_dagger[None, :])
    else:
        batch = BatchState(grid, state.samples[None, :], gens)
    propagate_batch(batch, zeta, params, mode, prep)
    if batch.diverged[0]:
        raise TrajectoryDiverged("trajectory exceeded the divergence threshold")
    if batch.dagger is not None:
        return PPPair(grid, batch.samples[0], batch.dagger[0])
    return PulseField(grid, batch.samples[0])
