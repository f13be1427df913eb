"""Tests for survival amplitudes, the cosine law, the MT bound, and decay rates."""

import numpy as np
import pytest
from conftest import random_hermitian, random_unit

from fsqd import (
    GridError,
    HamiltonianSchedule,
    HermitianOperator,
    PhysicalConstants,
    StateVector,
    Trajectory,
    build_survival_report,
    decay_rate_closed,
    decay_rate_empirical,
    decay_velocity,
    energy_uncertainty,
    fs_rate,
    mt_check,
    predicted_amplitude,
    sample_trajectory,
    survival_amplitude,
)

E1 = StateVector([1.0, 0.0])
PLUS = StateVector(np.array([1.0, 1.0]) / np.sqrt(2.0))
H01 = HermitianOperator(np.diag([0.0, 1.0]))
GEODESIC_SCHED = HamiltonianSchedule.constant(H01)

# three-level case where the cosine law is a strict lower bound off geodesics
PSI3 = StateVector([1.0 / np.sqrt(2.0), 0.5, 0.5])
H3 = HermitianOperator(np.diag([0.0, 1.0, 2.0]))
DELTA_H3 = np.sqrt(11.0) / 4.0  # ⟨H²⟩ − ⟨H⟩² = 5/4 − 9/16 = 11/16


def _two_level_amplitude_oracle(times: np.ndarray) -> np.ndarray:
    """Closed form for ψ₀ = (1,1)/√2 under diag(0,1): A_t = (1 + e^{−it})/2."""
    return (1.0 + np.exp(-1j * times)) / 2.0


class TestSurvivalAmplitude:
    def test_initial_point_is_one(self):
        traj = sample_trajectory(PLUS, H01, 1.0, 8)
        amps = survival_amplitude(traj)
        assert amps[0] == pytest.approx(1.0, abs=1e-12)

    def test_eigenstate_has_flat_magnitude(self):
        traj = sample_trajectory(E1, H01, 5.0, 32)
        np.testing.assert_allclose(np.abs(survival_amplitude(traj)), 1.0, atol=1e-12)

    def test_two_level_closed_form(self):
        traj = sample_trajectory(PLUS, H01, 4.0, 100)
        amps = survival_amplitude(traj)
        np.testing.assert_allclose(amps, _two_level_amplitude_oracle(traj.times), atol=1e-12)
        np.testing.assert_allclose(np.abs(amps), np.abs(np.cos(traj.times / 2)), atol=1e-12)


class TestPredictedAmplitude:
    def test_starts_at_one(self):
        traj = sample_trajectory(PLUS, H01, 1.0, 8)
        prediction = predicted_amplitude(traj, GEODESIC_SCHED)
        assert prediction.values[0] == 1.0
        assert prediction.in_domain[0]

    def test_constant_schedule_reduces_to_cos_t_delta_h(self):
        traj = sample_trajectory(PLUS, H01, 2.0, 64)
        prediction = predicted_amplitude(traj, GEODESIC_SCHED)
        np.testing.assert_allclose(prediction.values, np.cos(0.5 * traj.times), atol=1e-10)

    def test_geodesic_equality_on_fine_grid(self):
        """On the two-level geodesic the measured |A_t| equals the prediction
        to 1e-6 over a 10³-point in-domain grid."""
        horizon = np.pi / (2 * 0.5)
        traj = sample_trajectory(PLUS, H01, horizon, 1000)
        prediction = predicted_amplitude(traj, GEODESIC_SCHED)
        measured = np.abs(survival_amplitude(traj))
        assert np.all(prediction.in_domain)
        assert np.max(np.abs(measured - prediction.values)) <= 1e-6

    def test_three_level_prediction_is_strictly_below_measurement(self):
        """Off-geodesic the cosine law is a lower bound, not an identity."""
        horizon = np.pi / (2 * DELTA_H3)
        traj = sample_trajectory(PSI3, H3, horizon, 512)
        prediction = predicted_amplitude(traj, HamiltonianSchedule.constant(H3))
        measured = np.abs(survival_amplitude(traj))
        interior = slice(1, -1)
        gaps = measured[interior] - prediction.values[interior]
        assert np.all(gaps > 0)
        assert np.max(gaps) >= 1e-3

    def test_out_of_domain_flagging(self):
        traj = sample_trajectory(PLUS, H01, 2 * np.pi, 64)  # horizon is π
        prediction = predicted_amplitude(traj, GEODESIC_SCHED)
        integral = 0.5 * traj.times
        np.testing.assert_array_equal(
            prediction.in_domain, integral <= np.pi / 2 + 1e-12
        )
        assert not prediction.in_domain[-1]


class TestMtCheck:
    def test_eigenstate_trivially_satisfied(self):
        traj = sample_trajectory(E1, H01, 3.0, 64)
        assert mt_check(traj, H01) == []

    def test_geodesic_equality_within_1e9(self):
        horizon = np.pi / (2 * 0.5)
        traj = sample_trajectory(PLUS, H01, horizon, 1024)
        measured = np.abs(survival_amplitude(traj))
        bound = np.cos(0.5 * traj.times)
        assert np.max(np.abs(measured - bound)) <= 1e-9
        assert mt_check(traj, H01) == []

    def test_random_campaign_no_violations(self):
        rng = np.random.default_rng(50)
        for _ in range(100):
            dim = int(rng.integers(2, 9))
            psi, H = random_unit(rng, dim), random_hermitian(rng, dim)
            delta_h = energy_uncertainty(H, psi)
            horizon = np.pi / (2 * delta_h) if delta_h > 1e-12 else 1.0
            traj = sample_trajectory(psi, H, horizon, 255)
            assert mt_check(traj, H, tol=1e-9) == []

    def test_detects_a_planted_violation(self):
        """A hand-built non-unitary trajectory must be flagged, with depth."""
        e1 = StateVector([1.0, 0.0])
        e2 = StateVector([0.0, 1.0])
        fake = Trajectory(
            times=np.array([0.0, 0.1]), states=(e1, e2), schedule_digest={}
        )
        violations = mt_check(fake, H01, tol=1e-9)
        assert len(violations) == 1
        index, depth = violations[0]
        assert index == 1
        # ΔH(e₁) = 0 → bound cos(0) = 1 while |A| = 0
        assert depth == pytest.approx(1.0, abs=1e-12)

    def test_rejects_nonpositive_tolerance(self):
        traj = sample_trajectory(PLUS, H01, 1.0, 4)
        with pytest.raises(ValueError):
            mt_check(traj, H01, tol=0.0)


class TestDecayVelocity:
    def test_eigenstate(self):
        assert decay_velocity(E1, H01) == pytest.approx(0.0, abs=1e-12)

    def test_superposition(self):
        assert decay_velocity(PLUS, H01) == pytest.approx(0.5, abs=1e-14)

    def test_hbar_two_halves_the_velocity(self):
        assert decay_velocity(PLUS, H01, PhysicalConstants(2.0)) == pytest.approx(
            0.25, abs=1e-14
        )

    def test_shares_implementation_with_fs_rate(self):
        rng = np.random.default_rng(51)
        psi, H = random_unit(rng, 6), random_hermitian(rng, 6)
        assert decay_velocity(psi, H) == fs_rate(psi, H)


class TestDecayRateEmpirical:
    def test_flat_probability_gives_zero(self):
        times = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(
            decay_rate_empirical(times, np.ones(11)), np.zeros(11), atol=1e-14
        )

    def test_two_level_analytic_derivative(self):
        """p = cos²(t/2) → w = sin(t)/2, to 1e-6 at grid step 1e-3."""
        times = np.arange(0.0, 3.1415, 1e-3)
        prob = np.cos(times / 2) ** 2
        rates = decay_rate_empirical(times, prob)
        np.testing.assert_allclose(rates, np.sin(times) / 2, atol=1e-6)

    def test_zero_slope_at_origin(self):
        times = np.arange(0.0, 0.5, 1e-3)
        prob = np.cos(times / 2) ** 2
        assert decay_rate_empirical(times, prob)[0] == pytest.approx(0.0, abs=1e-6)

    def test_needs_three_points(self):
        with pytest.raises(GridError, match="at least 3"):
            decay_rate_empirical(np.array([0.0, 1.0]), np.array([1.0, 0.9]))

    def test_rejects_nonuniform_grid(self):
        with pytest.raises(GridError, match="uniform"):
            decay_rate_empirical(np.array([0.0, 1.0, 3.0]), np.array([1.0, 0.9, 0.5]))


class TestDecayRateClosed:
    def test_zero_time(self):
        assert decay_rate_closed(0.0, 0.5) == 0.0

    def test_zero_spread(self):
        assert decay_rate_closed(3.0, 0.0) == 0.0

    def test_quarter_period_value(self):
        # sin(2·(π/2)·0.5)·0.5 = sin(π/2)·0.5 = 0.5
        assert decay_rate_closed(np.pi / 2, 0.5) == pytest.approx(0.5, abs=1e-15)

    def test_accumulated_integral_form(self):
        integral = np.array([0.0, 0.3, 0.7])
        out = decay_rate_closed(None, 0.5, accumulated_integral=integral)
        np.testing.assert_allclose(out, np.sin(2 * integral) * 0.5, atol=1e-15)

    def test_rejects_negative_spread(self):
        with pytest.raises(ValueError):
            decay_rate_closed(1.0, -0.1)

    def test_matches_empirical_on_geodesic(self):
        traj = sample_trajectory(PLUS, H01, 3.141, 3141)
        prob = np.abs(survival_amplitude(traj)) ** 2
        empirical = decay_rate_empirical(traj.times, prob)
        closed = decay_rate_closed(traj.times, 0.5)
        np.testing.assert_allclose(empirical, closed, atol=1e-6)


class TestBuildSurvivalReport:
    def test_eigenstate_run(self):
        traj = sample_trajectory(E1, H01, 2.0, 32)
        report = build_survival_report(traj, GEODESIC_SCHED)
        np.testing.assert_allclose(report.amplitude_abs, 1.0, atol=1e-12)
        np.testing.assert_allclose(report.decay_rate_closed, 0.0, atol=1e-12)
        np.testing.assert_allclose(report.decay_rate_empirical, 0.0, atol=1e-9)
        assert report.violations == ()

    def test_geodesic_prediction_matches_measurement(self):
        horizon = np.pi / (2 * 0.5)
        traj = sample_trajectory(PLUS, H01, horizon, 1000)
        report = build_survival_report(traj, GEODESIC_SCHED)
        in_domain = report.predicted_in_domain
        assert np.all(in_domain)
        assert np.max(
            np.abs(report.amplitude_abs[in_domain] - report.predicted_abs[in_domain])
        ) <= 1e-6

    def test_three_level_prediction_below_measurement(self):
        horizon = np.pi / (2 * DELTA_H3)
        traj = sample_trajectory(PSI3, H3, horizon, 512)
        report = build_survival_report(traj, HamiltonianSchedule.constant(H3))
        interior = slice(1, -1)
        gaps = (report.amplitude_abs - report.predicted_abs)[interior]
        assert np.all(gaps > 0)

    def test_probability_is_square_of_amplitude(self):
        rng = np.random.default_rng(52)
        psi, H = random_unit(rng, 4), random_hermitian(rng, 4)
        traj = sample_trajectory(psi, H, 2.0, 64)
        report = build_survival_report(traj, HamiltonianSchedule.constant(H))
        np.testing.assert_allclose(
            report.probability, report.amplitude_abs**2, atol=1e-12
        )

    def test_out_of_domain_points_are_masked(self):
        traj = sample_trajectory(PLUS, H01, 2 * np.pi, 64)  # horizon π
        report = build_survival_report(traj, GEODESIC_SCHED)
        outside = ~report.predicted_in_domain
        assert np.any(outside)
        assert np.all(np.isnan(report.predicted_abs[outside]))
        assert np.all(np.isnan(report.mt_bound[outside]))
        assert np.all(np.isfinite(report.predicted_abs[~outside]))

    def test_phase_invariance(self):
        """A global phase on ψ₀ moves no report field by more than 1e-12."""
        rng = np.random.default_rng(53)
        psi, H = random_unit(rng, 5), random_hermitian(rng, 5)
        sched = HamiltonianSchedule.constant(H)
        base = build_survival_report(sample_trajectory(psi, H, 1.5, 64), sched)
        for _ in range(5):
            phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
            rotated = StateVector(phase * psi.amplitudes)
            other = build_survival_report(sample_trajectory(rotated, H, 1.5, 64), sched)
            np.testing.assert_allclose(other.amplitude_abs, base.amplitude_abs, atol=1e-12)
            np.testing.assert_allclose(other.probability, base.probability, atol=1e-12)
            np.testing.assert_allclose(
                other.predicted_abs, base.predicted_abs, atol=1e-12, equal_nan=True
            )
            np.testing.assert_allclose(
                other.mt_bound, base.mt_bound, atol=1e-12, equal_nan=True
            )

    def test_shift_invariance(self):
        """H → H + c·1 changes none of the magnitude-level fields within 1e-10."""
        rng = np.random.default_rng(54)
        psi, H = random_unit(rng, 4), random_hermitian(rng, 4)
        shifted = HermitianOperator(np.asarray(H.matrix) + 7.25 * np.eye(4))
        base = build_survival_report(
            sample_trajectory(psi, H, 1.0, 128), HamiltonianSchedule.constant(H)
        )
        other = build_survival_report(
            sample_trajectory(psi, shifted, 1.0, 128),
            HamiltonianSchedule.constant(shifted),
        )
        np.testing.assert_allclose(other.amplitude_abs, base.amplitude_abs, atol=1e-10)
        np.testing.assert_allclose(
            other.predicted_abs, base.predicted_abs, atol=1e-10, equal_nan=True
        )
        np.testing.assert_allclose(other.mt_bound, base.mt_bound, atol=1e-10, equal_nan=True)
        np.testing.assert_allclose(
            other.decay_rate_empirical, base.decay_rate_empirical, atol=1e-10
        )
        np.testing.assert_allclose(
            other.decay_rate_closed, base.decay_rate_closed, atol=1e-10
        )

    def test_amplitude_never_exceeds_one(self):
        rng = np.random.default_rng(55)
        for _ in range(30):
            dim = int(rng.integers(2, 9))
            psi, H = random_unit(rng, dim), random_hermitian(rng, dim)
            traj = sample_trajectory(psi, H, float(rng.uniform(0.5, 4.0)), 64)
            report = build_survival_report(traj, HamiltonianSchedule.constant(H))
            assert np.max(report.amplitude_abs) <= 1.0 + 1e-12

    def test_nonconstant_schedule_omits_mt_fields(self):
        flip = HermitianOperator([[0.0, 1.0], [1.0, 0.0]])
        sched = HamiltonianSchedule.sampled([0.0, 1.0], [H01, flip])
        from fsqd import evolve_schedule

        traj = evolve_schedule(PLUS, sched, 1.0, 64)
        report = build_survival_report(traj, sched)
        assert report.violations is None
        assert np.all(np.isnan(report.mt_bound))
        # closed rate falls back to the accumulated-integral form
        assert np.all(np.isfinite(report.decay_rate_closed))

    def test_short_trajectory_leaves_empirical_rate_empty(self):
        traj = sample_trajectory(PLUS, H01, 0.5, 1)
        report = build_survival_report(traj, GEODESIC_SCHED)
        assert np.all(np.isnan(report.decay_rate_empirical))
        assert np.all(np.isfinite(report.decay_rate_closed))
