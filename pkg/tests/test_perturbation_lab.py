import math

import numpy as np
import pytest

from perturbation_lab import (DEGREES_PLANTED, SWEEP_COLUMNS, PerturbationSpec, cutoff_shift,
                              eigen_asymptotics_check, estimate_rate, misclustering_rate, planted_affinity,
                              sample_perturbed, sweep, theory_error_probabilities, theory_rate)
from utils import ClusterForestsError


class TestPerturbationSpec:

    @pytest.mark.parametrize('kwargs', [{'gamma': 0.0}, {'gamma': 1.5}, {'nu': 0.5}, {'nu': -0.1},
                                        {'sigma': -1.0}, {'trials': 0}, {'degrees': 'mean'}])
    def test_invalid(self, kwargs):
        args = {'n1': 10, 'gamma': 1.0, 'nu': 0.1, 'sigma': 0.1}
        args.update(kwargs)
        with pytest.raises(ClusterForestsError):
            PerturbationSpec(**args)

    def test_empty_second_block(self):
        with pytest.raises(ClusterForestsError):
            PerturbationSpec(2, 0.1, 0.1, 0.1)

    def test_sizes(self):
        spec = PerturbationSpec(100, 0.5, 0.1, 1.0)
        assert (spec.n2, spec.n) == (50, 150)


class TestPlantedAffinity:

    def test_two_points(self):
        np.testing.assert_allclose(planted_affinity(1, 1, 0.1), [[0.9, 0.1], [0.1, 0.9]])

    def test_no_leak_is_block_diagonal(self):
        P = planted_affinity(2, 3, 0.0)
        np.testing.assert_array_equal(P[:2, :2], np.ones((2, 2)))
        np.testing.assert_array_equal(P[:2, 2:], np.zeros((2, 3)))

    def test_half_leak_is_constant(self):
        assert np.all(planted_affinity(3, 3, 0.5) == 0.5)


class TestSamplePerturbed:

    def test_no_noise_is_exact_copy(self):
        Pbar = planted_affinity(3, 2, 0.2)
        P = sample_perturbed(Pbar, 0.0, np.random.default_rng(0))
        np.testing.assert_array_equal(P, Pbar)
        assert P is not Pbar

    def test_symmetric(self):
        P = sample_perturbed(planted_affinity(20, 10, 0.1), 0.3, np.random.default_rng(1))
        np.testing.assert_array_equal(P, P.T)

    def test_noise_mean(self):
        n, sigma = 200, 0.5
        Pbar = planted_affinity(100, 100, 0.1)
        noise = sample_perturbed(Pbar, sigma, np.random.default_rng(2)) - Pbar
        entries = noise[np.tril_indices(n)]
        assert abs(entries.mean()) <= 4.0 * sigma / math.sqrt(n * (n + 1) / 2)
        assert entries.std() == pytest.approx(sigma, rel=0.05)


class TestMisclusteringRate:

    def test_perfect(self):
        assert misclustering_rate([0, 0, 1, 1], 2, 2) == 0.0

    def test_swapped(self):
        assert misclustering_rate([1, 1, 0, 0], 2, 2) == 0.0

    def test_one_wrong(self):
        labels = np.repeat([0, 1], 50)
        labels[3] = 1
        assert misclustering_rate(labels, 50, 50) == pytest.approx(0.01)

    def test_too_many_clusters(self):
        with pytest.raises(ClusterForestsError):
            misclustering_rate([0, 1, 2, 2], 2, 2)

    def test_length(self):
        with pytest.raises(ClusterForestsError):
            misclustering_rate([0, 1, 1], 2, 2)


class TestTheory:

    def test_values(self):
        assert theory_rate(1.0, 1.0) == pytest.approx(-0.125)
        assert theory_rate(1.0, 2.0) == pytest.approx(-1.0 / 32.0)
        assert theory_rate(1.0, 0.0) == -math.inf

    def test_balanced_blocks_decay_fastest(self):
        rates = [theory_rate(gamma, 1.0) for gamma in np.linspace(0.02, 1.0, 50)]
        # strictly falling on (0, 1], so the minimum sits at gamma = 1
        assert all(a > b for a, b in zip(rates, rates[1:]))

    def test_more_noise_slower_decay(self):
        rates = [theory_rate(0.5, sigma) for sigma in (0.5, 1.0, 2.0, 4.0)]
        assert all(a < b for a, b in zip(rates, rates[1:]))

    def test_error_probabilities(self):
        probs = theory_error_probabilities(50, 0.5, 2.0)
        assert probs.first_block > probs.second_block
        assert probs.second_block < probs.expected_rate < probs.first_block
        balanced = theory_error_probabilities(50, 1.0, 2.0)
        assert balanced.first_block == balanced.second_block == balanced.expected_rate
        assert theory_error_probabilities(50, 1.0, 0.0).expected_rate == 0.0


class TestEstimateRate:

    def test_no_noise_never_misclusters(self):
        estimate = estimate_rate(PerturbationSpec(30, 1.0, 0.05, 0.0, trials=3))
        assert estimate.mean_M == 0.0
        assert estimate.empirical == -math.inf
        assert (estimate.completed, estimate.aborted) == (3, 0)

    def test_small_noise_recovers_blocks(self):
        estimate = estimate_rate(PerturbationSpec(100, 1.0, 0.1, 0.05, trials=20, seed=3))
        assert estimate.mean_M == 0.0

    def test_planted_degrees_never_abort(self):
        estimate = estimate_rate(PerturbationSpec(3, 1.0, 0.1, 5.0, trials=20, degrees=DEGREES_PLANTED))
        assert estimate.aborted == 0

    def test_heavy_noise_accounts_for_every_trial(self):
        estimate = estimate_rate(PerturbationSpec(3, 1.0, 0.1, 5.0, trials=30, seed=1))
        assert estimate.completed + estimate.aborted == 30
        assert estimate.aborted > 0

    def test_thread_count_does_not_change_result(self):
        spec = PerturbationSpec(20, 0.5, 0.1, 0.8, trials=12, seed=5)
        assert estimate_rate(spec, threads=1) == estimate_rate(spec, threads=3)


class TestEigenAsymptotics:

    def test_second_eigenvalue(self):
        report = eigen_asymptotics_check(500, 1.0, 0.01)
        assert report.lambda1 == pytest.approx(1.0, abs=1e-10)
        assert report.lambda2 == pytest.approx(0.98, abs=1e-3)
        assert report.lambda2_error < 1e-3

    def test_balanced_vector_is_block_constant(self):
        report = eigen_asymptotics_check(200, 1.0, 0.05)
        assert report.x2_spread < 1e-8
        assert report.x2_deviation < 1e-8

    def test_disconnected_blocks(self):
        report = eigen_asymptotics_check(20, 0.5, 0.0)
        assert report.lambda1 == pytest.approx(1.0, abs=1e-12)
        assert report.lambda2 == pytest.approx(1.0, abs=1e-12)


class TestCutoffShift:

    def test_blocks_on_either_side(self):
        shift = cutoff_shift(PerturbationSpec(40, 1.0, 0.1, 0.5, trials=10, seed=2))
        assert shift.first_block_mean < 0.0 < shift.second_block_mean
        assert shift.first_block_mean < shift.best_cutoff < shift.second_block_mean


class TestSweep:

    def test_grid(self):
        frame = sweep(10, [0.5, 1.0], [0.1, 0.5], 0.1, trials=3, seed=4)
        assert list(frame.columns) == SWEEP_COLUMNS
        assert len(frame) == 4
        assert list(frame['n']) == [15, 15, 20, 20]
        assert frame['log_rate_theory'].iloc[3] == pytest.approx(theory_rate(1.0, 0.5))

    def test_repeatable(self):
        a = sweep(8, [1.0], [0.3, 0.6], 0.1, trials=4, seed=9)
        b = sweep(8, [1.0], [0.3, 0.6], 0.1, trials=4, seed=9)
        assert a.equals(b)


@pytest.mark.slow
def test_empirical_rate_follows_theory():
    sigma = math.sqrt(1.0 / (8.0 * 0.02))
    estimate = estimate_rate(PerturbationSpec(100, 1.0, 0.05, sigma, trials=2000, seed=0), threads=4)
    assert estimate.empirical == pytest.approx(estimate.theory, rel=0.4)


@pytest.mark.slow
def test_empirical_errors_grow_with_noise():
    means = [estimate_rate(PerturbationSpec(100, 1.0, 0.05, sigma, trials=400, seed=1, degrees=DEGREES_PLANTED),
                           threads=4).mean_M
             for sigma in (1.0, 1.5, 2.0, 2.5, 3.0)]
    assert all(a <= b for a, b in zip(means, means[1:]))


@pytest.mark.slow
def test_unbalanced_blocks_fail_more_often():
    unbalanced = PerturbationSpec(165, 0.2, 0.05, 2.0, trials=400, seed=3, degrees=DEGREES_PLANTED)
    balanced = PerturbationSpec(100, 1.0, 0.05, 2.0, trials=400, seed=3, degrees=DEGREES_PLANTED)
    assert abs(unbalanced.n - balanced.n) <= 2
    assert estimate_rate(unbalanced, threads=4).mean_M >= estimate_rate(balanced, threads=4).mean_M
