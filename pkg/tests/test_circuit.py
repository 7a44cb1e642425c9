import math

import numpy as np
import pytest

from qduality import circuit as ct
from qduality import qstate as qs

SQRT2 = math.sqrt(2.0)


def closed_form_final_state(phi, delta=math.pi / 4):
    """Independent construction of the entangled final state.

    Built directly from the particle/wave kets and the Bell basis via
    explicit tensor products, never through gate application.
    """
    p = ct.particle_state(phi).amplitudes
    w = ct.wave_state(phi).amplitudes
    minus_i = qs.bell_ket("phi-") - 1j * qs.bell_ket("psi+")
    plus_i = qs.bell_ket("phi-") + 1j * qs.bell_ket("psi+")
    amps = 0.5 * (np.kron(p, minus_i) + np.exp(1j * delta) * np.kron(w, plus_i))
    return qs.state_from_amplitudes(amps)


def closed_form_correlation(theta1, theta2, phi):
    """Printed closed form, valid at theta1 = 0 and pi/4."""
    sign = 1.0 if abs(theta1) < 1e-12 else -1.0
    return (math.cos(2 * theta2 + math.pi / 4)
            + sign * math.sin(phi) * math.cos(2 * theta2 - math.pi / 4)) / SQRT2


class TestInitialState:
    def test_delta_zero(self):
        amps = ct.initial_state(0.0).amplitudes
        expected = np.zeros(8)
        expected[0b101] = expected[0b110] = 1 / SQRT2
        assert np.allclose(amps, expected, atol=1e-12)

    def test_delta_pi(self):
        amps = ct.initial_state(math.pi).amplitudes
        assert amps[0b101] == pytest.approx(1 / SQRT2, abs=1e-12)
        assert amps[0b110] == pytest.approx(-1 / SQRT2, abs=1e-12)

    def test_delta_quarter(self):
        amps = ct.initial_state(math.pi / 4).amplitudes
        assert amps[0b110] == pytest.approx(np.exp(1j * math.pi / 4) / SQRT2,
                                            abs=1e-12)


class TestParticleWave:
    def test_particle_at_zero(self):
        assert np.allclose(ct.particle_state(0.0).amplitudes,
                           [1 / SQRT2, -1 / SQRT2], atol=1e-12)

    def test_wave_at_zero_is_v(self):
        assert ct.wave_state(0.0).fidelity(qs.product_state(qs.KET_V)) == \
            pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("phi", np.linspace(0, 2 * math.pi, 13))
    def test_born_statistics(self, phi):
        # direct Born-rule oracle on the raw amplitudes
        p = ct.particle_state(phi).amplitudes
        w = ct.wave_state(phi).amplitudes
        assert abs(p[0]) ** 2 == pytest.approx(0.5, abs=1e-12)
        assert abs(p[1]) ** 2 == pytest.approx(0.5, abs=1e-12)
        assert abs(w[0]) ** 2 == pytest.approx(math.sin(phi / 2) ** 2, abs=1e-12)
        assert abs(w[1]) ** 2 == pytest.approx(math.cos(phi / 2) ** 2, abs=1e-12)


class TestFinalState:
    @pytest.mark.parametrize("phi", [0.0, math.pi / 2, math.pi, 3 * math.pi / 2])
    def test_matches_closed_form(self, phi):
        got = ct.final_state(phi, math.pi / 4)
        assert got.fidelity(closed_form_final_state(phi)) >= 1 - 1e-12

    def test_closed_form_on_dense_grid(self):
        for phi in np.linspace(0, 2 * math.pi, 32):
            got = ct.final_state(phi)
            assert got.fidelity(closed_form_final_state(phi)) >= 1 - 1e-12

    def test_maximally_entangled_at_quarter_phase(self):
        coeffs = qs.schmidt_coefficients(ct.final_state(math.pi / 2), (0,))
        assert np.allclose(coeffs, [1 / SQRT2, 1 / SQRT2], atol=1e-10)

    @pytest.mark.parametrize("phi", [0.3, 1.2, 4.0])
    def test_projecting_pair_prepares_wave(self, phi):
        # projector oracle: conditioning the pair on (|phi-> + i|psi+>)/sqrt2
        # must leave the system photon exactly in the wave state
        state = ct.final_state(phi).amplitudes.reshape(2, 4)
        ket = (qs.bell_ket("phi-") + 1j * qs.bell_ket("psi+")) / SQRT2
        conditional = state @ ket.conj()
        conditional /= np.linalg.norm(conditional)
        overlap = abs(np.vdot(ct.wave_state(phi).amplitudes, conditional)) ** 2
        assert overlap == pytest.approx(1.0, abs=1e-12)


class TestProjectors:
    def test_alice_zero_is_h(self):
        assert np.allclose(ct.alice_projector(0.0, "+").matrix,
                           np.diag([1.0, 0.0]), atol=1e-12)

    def test_alice_diag(self):
        expected = np.full((2, 2), 0.5)
        assert np.allclose(ct.alice_projector(math.pi / 4, "+").matrix, expected,
                           atol=1e-12)

    @pytest.mark.parametrize("theta1", np.linspace(-1.5, 1.5, 7))
    def test_alice_completeness(self, theta1):
        total = ct.alice_projector(theta1, "+").matrix + \
            ct.alice_projector(theta1, "-").matrix
        assert np.max(np.abs(total - np.eye(2))) < 1e-12

    def test_bob_zero_is_phi_minus(self):
        expected = qs.projector_onto(qs.bell_ket("phi-")).matrix
        assert np.allclose(ct.bob_projector(0.0, "+").matrix, expected, atol=1e-12)

    def test_bob_right_angle_is_psi_plus(self):
        expected = qs.projector_onto(qs.bell_ket("psi+")).matrix
        assert np.allclose(ct.bob_projector(math.pi / 2, "+").matrix, expected,
                           atol=1e-12)

    def test_bob_quarter_in_local_basis(self):
        # algebraic expansion oracle: (|phi-> + |psi+>)/sqrt2 = (|HD> + |VA>)/sqrt2
        hd = np.kron(qs.KET_H, qs.KET_D)
        va = np.kron(qs.KET_V, qs.KET_A)
        expected = qs.projector_onto((hd + va) / SQRT2).matrix
        assert np.allclose(ct.bob_projector(math.pi / 4, "+").matrix, expected,
                           atol=1e-12)

    def test_bob_minus_is_plus_at_rotated_angle(self):
        for theta2 in np.linspace(-1.2, 1.2, 9):
            minus = ct.bob_projector(theta2, "-").matrix
            rotated = ct.bob_projector(theta2 + math.pi / 2, "+").matrix
            assert np.array_equal(minus, rotated)

    def test_bob_outcomes_orthogonal(self):
        plus = ct.bob_projector(0.7, "+").matrix
        minus = ct.bob_projector(0.7, "-").matrix
        assert np.max(np.abs(plus @ minus)) < 1e-12


class TestCoincidences:
    def test_perfectly_correlated_point(self):
        dist = ct.coincidence_probabilities(
            ct.ExperimentConfig(phi=math.pi / 2, theta1=0.0, theta2=0.0))
        assert np.allclose(dist.as_array(), [0.5, 0.0, 0.0, 0.5], atol=1e-12)

    def test_half_anticorrelated_point(self):
        dist = ct.coincidence_probabilities(
            ct.ExperimentConfig(phi=0.0, theta1=0.0, theta2=math.pi / 4))
        assert dist.correlation == pytest.approx(-0.5, abs=1e-10)

    def test_zero_visibility_is_uniform(self):
        for theta2, phi in ((0.3, 1.0), (-0.9, 5.0)):
            dist = ct.coincidence_probabilities(
                ct.ExperimentConfig(phi=phi, theta1=0.4, theta2=theta2,
                                    noise=ct.NoiseParams(visibility=0.0)))
            assert np.allclose(dist.as_array(), [0.25] * 4, atol=1e-12)

    def test_distributions_valid_under_random_noise(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            cfg = ct.ExperimentConfig(
                phi=rng.uniform(0, 2 * math.pi),
                theta1=rng.uniform(-math.pi, math.pi),
                theta2=rng.uniform(-math.pi, math.pi),
                noise=ct.NoiseParams(visibility=rng.random(),
                                     background=rng.random()),
            )
            probs = ct.coincidence_probabilities(cfg).as_array()
            assert np.all(probs >= -1e-12)
            assert abs(probs.sum() - 1.0) < 1e-10

    def test_invalid_noise_rejected(self):
        with pytest.raises(ValueError):
            ct.NoiseParams(visibility=1.2)
        with pytest.raises(ValueError):
            ct.NoiseParams(background=-0.1)


class TestCorrelation:
    def test_reference_point(self):
        e = ct.correlation(ct.ExperimentConfig(phi=3 * math.pi / 2,
                                               theta1=0.0, theta2=math.pi / 8))
        assert e == pytest.approx(-1 / SQRT2, abs=1e-10)

    def test_perfect_correlation(self):
        e = ct.correlation(ct.ExperimentConfig(phi=math.pi / 2,
                                               theta1=0.0, theta2=0.0))
        assert e == pytest.approx(1.0, abs=1e-10)

    def test_matches_closed_form_on_grid(self):
        for theta1 in (0.0, math.pi / 4):
            for theta2 in ct.THETA2_GRID_9:
                for phi in ct.PHI_GRID_9:
                    got = ct.correlation(
                        ct.ExperimentConfig(phi=phi, theta1=theta1, theta2=theta2))
                    assert got == pytest.approx(
                        closed_form_correlation(theta1, theta2, phi), abs=1e-10)

    def test_antisymmetry_in_bob_angle(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            theta1 = rng.uniform(-math.pi, math.pi)
            theta2 = rng.uniform(-math.pi, math.pi)
            phi = rng.uniform(0, 2 * math.pi)
            plus = ct.correlation(
                ct.ExperimentConfig(phi=phi, theta1=theta1, theta2=theta2))
            shifted = ct.correlation(
                ct.ExperimentConfig(phi=phi, theta1=theta1,
                                    theta2=theta2 + math.pi / 2))
            assert shifted == pytest.approx(-plus, abs=1e-10)

    def test_noise_scales_linearly(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            theta1 = rng.uniform(-math.pi, math.pi)
            theta2 = rng.uniform(-math.pi, math.pi)
            phi = rng.uniform(0, 2 * math.pi)
            v, b = rng.random(), rng.random()
            ideal = ct.correlation(
                ct.ExperimentConfig(phi=phi, theta1=theta1, theta2=theta2))
            noisy = ct.correlation(
                ct.ExperimentConfig(phi=phi, theta1=theta1, theta2=theta2,
                                    noise=ct.NoiseParams(visibility=v,
                                                         background=b)))
            assert noisy == pytest.approx((1 - b) * v * ideal, abs=1e-10)

    def test_alice_marginal_fair_at_fringe_extrema(self):
        # fair marginals hold at the working phases sin(phi) = +-1; at
        # generic phi the system photon's reduced state is phase-biased
        for theta1 in (0.0, math.pi / 4):
            for phi in (math.pi / 2, 3 * math.pi / 2):
                for theta2 in ct.THETA2_GRID_9:
                    dist = ct.coincidence_probabilities(
                        ct.ExperimentConfig(phi=phi, theta1=theta1,
                                            theta2=theta2))
                    assert dist.alice_plus_marginal == pytest.approx(0.5,
                                                                     abs=1e-10)


class TestChsh:
    def test_ideal_maximum_at_both_working_points(self):
        assert ct.chsh(3 * math.pi / 2) == pytest.approx(2 * SQRT2, abs=1e-10)
        assert ct.chsh(math.pi / 2, theta1_pair=(math.pi / 4, 0.0)) == \
            pytest.approx(2 * SQRT2, abs=1e-10)

    def test_reduced_visibility_reproduces_measured_value(self):
        s = ct.chsh(3 * math.pi / 2, noise=ct.NoiseParams(visibility=0.7718))
        assert s == pytest.approx(2.1829, abs=1e-3)

    def test_threshold_visibility_hits_local_bound(self):
        s = ct.chsh(3 * math.pi / 2, noise=ct.NoiseParams(visibility=1 / SQRT2))
        assert s == pytest.approx(2.0, abs=1e-10)

    def test_degenerate_pairs_rejected(self):
        with pytest.raises(ValueError):
            ct.chsh(0.0, theta1_pair=(0.1, 0.1))
        with pytest.raises(ValueError):
            ct.chsh(0.0, theta2_pair=(0.2, 0.2))


class TestSurface:
    def test_ideal_extremes(self):
        table = ct.correlation_surface(0.0)
        assert table.shape == (9, 9)
        assert table.min() == pytest.approx(-1.0, abs=1e-10)
        assert table.max() == pytest.approx(1.0, abs=1e-10)

    def test_degraded_extremes(self):
        table = ct.correlation_surface(0.0, noise=ct.NoiseParams(visibility=0.86))
        assert table.min() == pytest.approx(-0.86, abs=1e-10)
        assert table.max() == pytest.approx(0.86, abs=1e-10)

    def test_single_point_grid_reduces_to_correlation(self):
        table = ct.correlation_surface(0.0, theta2_grid=(0.3,), phi_grid=(1.1,))
        expected = ct.correlation(ct.ExperimentConfig(phi=1.1, theta1=0.0,
                                                      theta2=0.3))
        assert table.shape == (1, 1)
        assert table[0, 0] == pytest.approx(expected, abs=1e-12)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            ct.correlation_surface(0.0, theta2_grid=(), phi_grid=(1.0,))


class TestSampling:
    def test_degenerate_distribution(self):
        dist = ct.OutcomeDistribution(1.0, 0.0, 0.0, 0.0)
        counts = ct.sample_counts(dist, 100, seed=0)
        assert list(counts) == [100, 0, 0, 0]

    def test_seed_determinism(self):
        dist = ct.OutcomeDistribution(0.4, 0.1, 0.2, 0.3)
        a = ct.sample_counts(dist, 5000, seed=42)
        b = ct.sample_counts(dist, 5000, seed=42)
        assert np.array_equal(a, b)
        assert a.sum() == 5000

    def test_zero_total_rejected(self):
        dist = ct.OutcomeDistribution(0.25, 0.25, 0.25, 0.25)
        with pytest.raises(ValueError):
            ct.sample_counts(dist, 0, seed=1)

    def test_sample_mean_matches_analytic_correlation(self):
        # law of large numbers against the analytic value -0.85/sqrt2
        cfg = ct.ExperimentConfig(phi=3 * math.pi / 2, theta1=0.0,
                                  theta2=math.pi / 8,
                                  noise=ct.NoiseParams(visibility=0.85))
        dist = ct.coincidence_probabilities(cfg)
        total = 5585
        values = []
        for seed in range(1000):
            counts = ct.sample_counts(dist, total, seed=seed)
            values.append((counts[0] - counts[1] - counts[2] + counts[3]) / total)
        values = np.asarray(values)
        expected = -0.85 / SQRT2
        stderr = math.sqrt((1 - expected**2) / total) / math.sqrt(len(values))
        assert abs(values.mean() - expected) < 3 * stderr


class TestVisibilityFit:
    def test_recovers_known_visibility(self):
        theta2 = np.linspace(-math.pi / 2, math.pi / 2, 17)
        noise = ct.NoiseParams(visibility=0.833)
        measured = [
            ct.correlation(ct.ExperimentConfig(phi=3 * math.pi / 2, theta1=0.0,
                                               theta2=t2, noise=noise))
            for t2 in theta2
        ]
        fitted = ct.fit_visibility(theta2, measured, theta1=0.0,
                                   phi=3 * math.pi / 2)
        assert fitted == pytest.approx(0.833, abs=1e-10)

    def test_recovers_visibility_from_sampled_counts(self):
        rng_seed = 123
        theta2 = np.linspace(-math.pi / 2, math.pi / 2, 9)
        noise = ct.NoiseParams(visibility=0.77)
        measured = []
        for i, t2 in enumerate(theta2):
            cfg = ct.ExperimentConfig(phi=math.pi / 2, theta1=math.pi / 4,
                                      theta2=t2, noise=noise)
            counts = ct.sample_counts(ct.coincidence_probabilities(cfg), 20000,
                                      seed=(rng_seed, i))
            measured.append(
                (counts[0] - counts[1] - counts[2] + counts[3]) / counts.sum())
        fitted = ct.fit_visibility(theta2, measured, theta1=math.pi / 4,
                                   phi=math.pi / 2)
        assert fitted == pytest.approx(0.77, abs=0.02)
