"""Sampling, seeding, merge laws, and stochastic-representation oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopsqueeze.engine import (
    NoiseDraws,
    PhysicsParams,
    electronic_noise_sigma,
    nonlinear_step,
)
from loopsqueeze.ensemble import (
    run_ensemble,
    sample_initial,
    trajectory_streams,
    wigner_noise_rows,
)
from loopsqueeze.errors import ConfigurationError, InvalidResultError
from loopsqueeze.grid import Grid, PPPair, PulseField, sech_pulse, vacuum_field
from loopsqueeze.interferometer import loop_topology
from loopsqueeze.observables import photon_statistics, squeezing_db

GRID = Grid(64, 8.0)
NBAR = 1.0e4


def spec(zeta=0.0, nbar=NBAR, dzeta=0.05):
    return loop_topology(0.9, zeta, PhysicsParams(nbar=nbar, dzeta=dzeta))


def summaries(stats):
    return (
        stats.n_traj,
        stats.alive,
        stats.diverged,
        stats.photon_raw,
        stats.momentum_raw,
    )


class TestInitialSampling:
    def test_deterministic_returns_mean(self):
        pulse = sech_pulse(1.0, GRID)
        assert sample_initial(pulse, "deterministic", NBAR) is pulse

    def test_positive_p_coherent_pair(self):
        pulse = sech_pulse(1.0, GRID)
        pair = sample_initial(pulse, "positive_p", NBAR)
        assert isinstance(pair, PPPair)
        np.testing.assert_array_equal(pair.phi, pulse.samples)
        np.testing.assert_array_equal(pair.phi_dagger, np.conj(pulse.samples))

    def test_wigner_requires_rng(self):
        with pytest.raises(ConfigurationError, match="rng"):
            sample_initial(sech_pulse(1.0, GRID), "wigner", NBAR)

    def test_unknown_mode(self):
        with pytest.raises(ConfigurationError, match="mode"):
            sample_initial(sech_pulse(1.0, GRID), "heisenberg", NBAR)

    def test_noise_quadrature_variance(self):
        rng = np.random.default_rng(11)
        rows = wigner_noise_rows(GRID, NBAR, rng, 20000)
        target = 1.0 / (4.0 * NBAR * GRID.dtau)
        assert np.var(rows.real) == pytest.approx(target, rel=0.01)
        assert np.var(rows.imag) == pytest.approx(target, rel=0.01)
        assert abs(np.mean(rows)) < 5 * np.sqrt(target / rows.size)

    def test_wigner_sample_centered_on_mean(self):
        pulse = sech_pulse(1.0, GRID)
        rng = np.random.default_rng(4)
        devs = np.stack(
            [sample_initial(pulse, "wigner", NBAR, rng).samples - pulse.samples for _ in range(500)]
        )
        target = 1.0 / (4.0 * NBAR * GRID.dtau)
        assert np.var(devs.real) == pytest.approx(target, rel=0.05)
        assert abs(np.mean(devs)) < 5 * np.sqrt(target / devs.size)


class TestSeeding:
    def test_streams_reproducible(self):
        a = trajectory_streams(42, 7)
        b = trajectory_streams(42, 7)
        for ga, gb in zip(a, b):
            np.testing.assert_array_equal(ga.standard_normal(16), gb.standard_normal(16))

    def test_streams_differ_between_trajectories(self):
        a = trajectory_streams(42, 7)[0].standard_normal(16)
        b = trajectory_streams(42, 8)[0].standard_normal(16)
        assert not np.array_equal(a, b)

    def test_three_streams_are_independent_draws(self):
        streams = trajectory_streams(0, 0)
        draws = [g.standard_normal(16) for g in streams]
        assert not np.array_equal(draws[0], draws[1])
        assert not np.array_equal(draws[1], draws[2])

    @pytest.mark.parametrize("bad", [-1, 1.5, "seed"])
    def test_bad_seed_rejected(self, bad):
        with pytest.raises(ConfigurationError):
            trajectory_streams(bad, 0)

    def test_negative_index_rejected(self):
        with pytest.raises(ConfigurationError):
            trajectory_streams(0, -1)


class TestRunEnsembleContract:
    def test_same_seed_bit_exact(self):
        pulse = sech_pulse(1.0, GRID)
        a = run_ensemble(pulse, spec(0.1), "wigner", 64, 9)
        b = run_ensemble(pulse, spec(0.1), "wigner", 64, 9)
        assert summaries(a) == summaries(b)
        np.testing.assert_array_equal(a.mean_field, b.mean_field)
        np.testing.assert_array_equal(a.raw_spectrum_mean, b.raw_spectrum_mean)

    def test_batch_size_invariance(self):
        pulse = sech_pulse(1.0, GRID)
        a = run_ensemble(pulse, spec(0.1), "wigner", 100, 5, batch_size=7)
        b = run_ensemble(pulse, spec(0.1), "wigner", 100, 5, batch_size=100)
        assert summaries(a) == summaries(b)
        np.testing.assert_array_equal(a.mean_field, b.mean_field)

    def test_worker_count_does_not_change_results(self):
        pulse = sech_pulse(1.0, GRID)
        a = run_ensemble(pulse, spec(0.1), "wigner", 50, 5, n_workers=1)
        b = run_ensemble(pulse, spec(0.1), "wigner", 50, 5, n_workers=4)
        assert summaries(a) == summaries(b)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n_traj=1),
            dict(n_traj=2.5),
            dict(measure_port="sideways"),
            dict(first_index=-3),
            dict(batch_size=0),
            dict(n_workers=0),
        ],
    )
    def test_validation(self, kwargs):
        args = dict(n_traj=4, measure_port="transmitted", first_index=0, batch_size=4, n_workers=1)
        args.update(kwargs)
        n = args.pop("n_traj")
        with pytest.raises(ConfigurationError):
            run_ensemble(sech_pulse(1.0, GRID), spec(), "wigner", n, 0, **args)

    def test_checkpoint_list_matches_single_runs(self):
        pulse = sech_pulse(1.0, GRID)
        out = run_ensemble(pulse, spec(0.1), "wigner", 40, 2, zeta_points=[0.05, 0.1])
        assert isinstance(out, list) and len(out) == 2
        direct = run_ensemble(pulse, spec(0.1), "wigner", 40, 2)
        # same step ladder here, so only exp() rounding separates the two
        assert out[1].photon_raw.mean == pytest.approx(direct.photon_raw.mean, rel=1e-12)
        np.testing.assert_allclose(out[1].mean_field, direct.mean_field, atol=1e-12)

    def test_ports_split_the_mean_energy(self):
        pulse = sech_pulse(1.0, GRID)
        t = run_ensemble(pulse, spec(), "wigner", 1500, 21)
        r = run_ensemble(pulse, spec(), "wigner", 1500, 21, measure_port="reflected")
        ct, cr = photon_statistics(t), photon_statistics(r)
        rho = 0.9
        expected = 4 * rho * (1 - rho) / (2 * rho - 1) ** 2
        tol = 3 * (cr.se_mean + ct.se_mean * expected) / ct.mean
        assert cr.mean / ct.mean == pytest.approx(expected, abs=tol)

    def test_vacuum_input_measures_zero_photons(self):
        stats = run_ensemble(vacuum_field(GRID), spec(), "wigner", 3000, 8)
        c = photon_statistics(stats)
        assert c.mean == pytest.approx(0.0, abs=3 * c.se_mean)

    def test_standard_error_scales_inverse_sqrt(self):
        pulse = sech_pulse(1.0, GRID)
        scaled = []
        for n in (500, 2000, 8000):
            c = photon_statistics(run_ensemble(pulse, spec(), "wigner", n, 13))
            scaled.append(c.se_mean * np.sqrt(n))
        assert max(scaled) / min(scaled) < 1.15


class TestMerge:
    def test_split_runs_merge_to_whole(self):
        pulse = sech_pulse(1.0, GRID)
        whole = run_ensemble(pulse, spec(0.1), "wigner", 60, 31)
        first = run_ensemble(pulse, spec(0.1), "wigner", 25, 31)
        second = run_ensemble(pulse, spec(0.1), "wigner", 35, 31, first_index=25)
        merged = first.merge(second)
        assert summaries(merged) == summaries(whole)
        np.testing.assert_array_equal(merged.mean_field, whole.mean_field)
        np.testing.assert_array_equal(merged.raw_spectrum_mean, whole.raw_spectrum_mean)

    @given(
        a=st.integers(min_value=2, max_value=26),
        b=st.integers(min_value=2, max_value=26),
    )
    @settings(max_examples=12, deadline=None)
    def test_merge_is_split_invariant(self, a, b):
        pulse = sech_pulse(1.0, GRID)
        n = 30
        whole = run_ensemble(pulse, spec(), "wigner", n, 99)
        if a + b > n - 2:
            b = n - a - 2
        parts = [
            run_ensemble(pulse, spec(), "wigner", a, 99),
            run_ensemble(pulse, spec(), "wigner", b, 99, first_index=a),
            run_ensemble(pulse, spec(), "wigner", n - a - b, 99, first_index=a + b),
        ]
        merged = parts[0].merge(parts[1]).merge(parts[2])
        assert summaries(merged) == summaries(whole)
        np.testing.assert_array_equal(merged.mean_field, whole.mean_field)

    def test_gap_rejected(self):
        pulse = sech_pulse(1.0, GRID)
        first = run_ensemble(pulse, spec(), "wigner", 10, 1)
        later = run_ensemble(pulse, spec(), "wigner", 10, 1, first_index=11)
        with pytest.raises(ConfigurationError, match="contiguous"):
            first.merge(later)

    def test_mismatched_metadata_rejected(self):
        pulse = sech_pulse(1.0, GRID)
        first = run_ensemble(pulse, spec(), "wigner", 10, 1)
        tail_kwargs = dict(first_index=10)
        other_port = run_ensemble(pulse, spec(), "wigner", 10, 1, measure_port="reflected", **tail_kwargs)
        with pytest.raises(ConfigurationError, match="port"):
            first.merge(other_port)
        other_mode = run_ensemble(pulse, spec(), "positive_p", 10, 1, **tail_kwargs)
        with pytest.raises(ConfigurationError, match="mode"):
            first.merge(other_mode)
        other_nbar = run_ensemble(pulse, spec(nbar=2 * NBAR), "wigner", 10, 1, **tail_kwargs)
        with pytest.raises(ConfigurationError, match="photon"):
            first.merge(other_nbar)

    def test_merge_leaves_inputs_usable(self):
        pulse = sech_pulse(1.0, GRID)
        first = run_ensemble(pulse, spec(), "wigner", 10, 1)
        second = run_ensemble(pulse, spec(), "wigner", 10, 1, first_index=10)
        before = summaries(first)
        first.merge(second)
        assert summaries(first) == before


class TestDivergenceAccounting:
    def test_noise_blowup_marks_run_invalid(self):
        # photon scale so small the multiplicative noise explodes immediately
        stats = run_ensemble(
            sech_pulse(1.0, GRID), spec(zeta=0.5, nbar=1e-4), "positive_p", 8, 0
        )
        assert stats.diverged == 8
        assert stats.diverged_fraction == 1.0
        assert not stats.valid
        with pytest.raises(InvalidResultError):
            stats.photon_raw

    def test_clean_run_is_valid(self):
        stats = run_ensemble(sech_pulse(1.0, GRID), spec(0.1), "wigner", 16, 0)
        assert stats.diverged == 0 and stats.valid


class TestPhaseShift:
    def test_interference_sign_controls_noise(self):
        # at the squeezing working point a pi phase offset turns the
        # destructive noise interference constructive
        grid = Grid(256, 25.0)
        pulse = sech_pulse(1.5, grid)
        phys = PhysicsParams(nbar=1.0e8, dzeta=0.004)
        n = 200
        dark = squeezing_db(
            run_ensemble(pulse, loop_topology(0.9, np.pi, phys), "wigner", n, 17)
        )
        bright = squeezing_db(
            run_ensemble(
                pulse, loop_topology(0.9, np.pi, phys, phase_shift=np.pi), "wigner", n, 17
            )
        )
        assert dark.variance_db < 0
        assert dark.variance_db < bright.variance_db - 3


class TestKerrDephasingOracle:
    def test_positive_p_mean_field_decay(self):
        # independent single-mode anharmonic oscillators: |<phi>| falls as
        # exp(n (cos(chi z) - 1)) with chi = 1/(nbar dtau), n = nbar dtau |c|^2.
        # kept at modest noise (zeta << nbar dtau) so the mean estimator is
        # not swamped by rare large-weight excursions
        grid = Grid(64, 16.0)
        nbar = 80.0
        dz = 0.05
        zeta = 2.0
        params = PhysicsParams(nbar=nbar, dzeta=dz)
        sigma = electronic_noise_sigma(params, grid)
        rng = np.random.default_rng(123)
        n_traj = 400
        acc = 0.0 + 0.0j
        count = 0
        for _ in range(n_traj):
            state = PPPair(grid, np.ones(grid.n_points, complex), np.ones(grid.n_points, complex))
            for _ in range(round(zeta / dz)):
                noise = NoiseDraws(
                    gamma_e=sigma * rng.standard_normal(grid.n_points),
                    gamma_e_dagger=sigma * rng.standard_normal(grid.n_points),
                )
                state = nonlinear_step(state, dz, params, noise)
            acc += np.sum(state.phi)
            count += grid.n_points
        chi = 1.0 / (nbar * grid.dtau)
        n_photons = nbar * grid.dtau
        expected = np.exp(n_photons * (np.cos(chi * zeta) - 1.0))
        assert abs(acc / count) == pytest.approx(expected, rel=0.02)
