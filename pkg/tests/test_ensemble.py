import numpy as np
import pandas as pd
import pytest

from conftest import blobs, dataset_path
from data import DataMatrix, load_csv, preset_g2, preset_g3, sample_gaussian_mixture, standardize
from ensemble import (REGULARIZE_EXP, CFConfig, CoAssociationMatrix, InvalidInputError, aggregate,
                      co_association, co_cluster_indicator, export_affinity_binary, export_affinity_csv,
                      read_affinity_binary, regularize, run_cluster_forests)
from growth import GrowthConfig
from metrics import rho_c, rho_r
from spectral import AffinityGraph, cluster_affinity, spectral_cluster


class TestIndicator:

    def test_hand_example(self):
        np.testing.assert_array_equal(co_cluster_indicator([0, 0, 1]), [[1, 1, 0], [1, 1, 0], [0, 0, 1]])

    def test_one_cluster_and_singletons(self):
        np.testing.assert_array_equal(co_cluster_indicator(np.zeros(4, dtype=int)), np.ones((4, 4)))
        np.testing.assert_array_equal(co_cluster_indicator(np.arange(4)), np.eye(4))


class TestAggregate:

    def test_single_member(self):
        indicator = co_cluster_indicator([0, 1, 1, 0])
        np.testing.assert_array_equal(aggregate([indicator]).values, indicator)

    def test_complementary_bipartitions(self):
        P = aggregate([co_cluster_indicator([0, 0, 1, 1]), co_cluster_indicator([0, 1, 0, 1])])
        assert P.values[0, 1] == 1.0 / 2.0
        assert P.values[0, 3] == 0.0
        assert P.values[1, 2] == 0.0

    def test_identical_members_stay_binary(self):
        indicator = co_cluster_indicator([2, 0, 2, 1])
        P = aggregate([indicator] * 7)
        assert set(np.unique(P.values)) <= {0.0, 1.0}

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            aggregate([])
        with pytest.raises(InvalidInputError):
            co_association([])

    def test_co_association_matches_aggregate(self):
        rng = np.random.default_rng(3)
        members = [rng.integers(0, 3, size=12) for _ in range(9)]
        direct = co_association(members)
        dense = aggregate([co_cluster_indicator(m) for m in members])
        np.testing.assert_allclose(direct.values, dense.values, rtol=0.0, atol=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            co_association([np.zeros(3), np.zeros(4)])


class TestCoAssociationMatrix:

    def test_from_dense_checks(self):
        with pytest.raises(InvalidInputError):
            CoAssociationMatrix.from_dense([[1.0, 0.2], [0.3, 1.0]])
        with pytest.raises(InvalidInputError):
            CoAssociationMatrix.from_dense([[0.5, 0.2], [0.2, 1.0]])
        with pytest.raises(InvalidInputError):
            CoAssociationMatrix([1.5], 2)

    def test_values_round_trip(self):
        dense = np.array([[1.0, 0.25, 0.0], [0.25, 1.0, 0.75], [0.0, 0.75, 1.0]])
        np.testing.assert_array_equal(CoAssociationMatrix.from_dense(dense).values, dense)

    def test_block_contrast(self):
        P = aggregate([co_cluster_indicator([0, 0, 1, 1])])
        assert P.block_contrast([0, 0, 1, 1]) == 1.0
        with pytest.raises(InvalidInputError):
            P.block_contrast([0, 0, 0, 0])


class TestRegularize:

    def test_below_threshold_zeroed(self):
        W = regularize(np.array([[1.0, 0.39], [0.39, 1.0]]), 10.0, 0.4)
        assert W[0, 1] == 0.0

    def test_scaling(self):
        W = regularize(np.array([[1.0, 0.5], [0.5, 1.0]]), 10.0, 0.4)
        assert W[0, 0] == pytest.approx(np.exp(10.0))
        assert W[0, 1] == pytest.approx(148.413159, rel=1e-6)

    def test_exp_mode_cut_entries_become_one(self):
        W = regularize(np.array([[1.0, 0.2], [0.2, 1.0]]), 10.0, 0.4, REGULARIZE_EXP)
        assert W[0, 1] == 1.0

    def test_monotone_in_p(self):
        P = np.linspace(0.0, 1.0, 21)
        W = regularize(P, 10.0, 0.4)
        assert np.all(np.diff(W) >= 0.0)

    @pytest.mark.parametrize('beta2', [0.0, 1.0, -0.2])
    def test_beta2_range(self, beta2):
        with pytest.raises(InvalidInputError):
            regularize(np.eye(2), 10.0, beta2)

    def test_unknown_mode(self):
        with pytest.raises(InvalidInputError):
            regularize(np.eye(2), 10.0, 0.4, 'square')


class TestCFConfig:

    @pytest.mark.parametrize('kwargs', [{'T': 0}, {'beta2': 1.0}, {'n_f': 1}, {'n_b': 1},
                                        {'regularize': 'none'}, {'spectral_method': 'kmeans'}])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidInputError):
            CFConfig(**kwargs)

    def test_base_clusters(self):
        assert CFConfig(n_f=3).base_clusters == 3
        assert CFConfig(n_f=3, n_b=5).base_clusters == 5


class TestRunClusterForests:

    def test_two_blobs(self, two_blobs):
        data, truth = two_blobs
        labels, P, diagnostics = run_cluster_forests(data, CFConfig(T=20, seed=1))
        assert rho_c(labels, truth) >= 0.99
        assert P.n == data.n
        assert len(diagnostics.kappas) == 20
        assert all(len(f) >= 2 for f in diagnostics.features)

    def test_single_member_is_spectral_of_its_indicator(self, small_blobs):
        data, _ = small_blobs
        labels, P, _ = run_cluster_forests(data, CFConfig(T=1, seed=4))
        expected = spectral_cluster(AffinityGraph(regularize(P, 10.0, 0.4)), 2)
        np.testing.assert_array_equal(labels.labels, expected.labels)
        assert set(np.unique(P.condensed)) <= {0.0, 1.0}

    def test_deterministic_across_threads(self, small_blobs):
        data, _ = small_blobs
        cfg = CFConfig(T=8, seed=11, growth=GrowthConfig(q=2))
        one_labels, one_P, _ = run_cluster_forests(data, cfg)
        many_labels, many_P, _ = run_cluster_forests(data, CFConfig(T=8, seed=11, growth=GrowthConfig(q=2),
                                                                     threads=4))
        np.testing.assert_array_equal(one_labels.labels, many_labels.labels)
        np.testing.assert_array_equal(one_P.condensed, many_P.condensed)

    def test_more_base_clusters(self):
        data, truth = blobs(n=60, p=4, offset=6.0, seed=9)
        labels, _, _ = run_cluster_forests(data, CFConfig(T=10, n_b=4, seed=2))
        assert labels.num_classes == 2
        assert len(labels) == len(truth)

    def test_affinity_blocks_follow_classes(self, small_blobs):
        data, truth = small_blobs
        _, P, _ = run_cluster_forests(data, CFConfig(T=10, seed=6))
        assert P.block_contrast(truth) > 0.5

    def test_permuting_aggregated_affinity_permutes_labels(self, small_blobs):
        data, _ = small_blobs
        labels, P, _ = run_cluster_forests(data, CFConfig(T=10, seed=8))
        order = np.random.default_rng(8).permutation(data.n)
        W = regularize(P, 10.0, 0.4)[np.ix_(order, order)]
        assert rho_c(cluster_affinity(AffinityGraph(W), 2), labels.labels[order]) == 1.0

    def test_permuting_rows_permutes_labels(self, small_blobs):
        data, _ = small_blobs
        order = np.random.default_rng(10).permutation(data.n)
        labels, _, _ = run_cluster_forests(data, CFConfig(T=10, seed=3))
        shuffled, _, _ = run_cluster_forests(data.take_rows(order), CFConfig(T=10, seed=3))
        assert rho_c(shuffled, labels.labels[order]) == 1.0

    def test_njw_variant(self, small_blobs):
        data, truth = small_blobs
        labels, _, _ = run_cluster_forests(data, CFConfig(T=10, spectral_method='njw', seed=5))
        assert rho_c(labels, truth) == 1.0

    def test_too_few_features(self):
        data = DataMatrix.from_array(np.random.default_rng(0).normal(size=(20, 1)))
        with pytest.raises(InvalidInputError):
            run_cluster_forests(data, CFConfig(T=2))

    def test_too_few_points(self):
        data = DataMatrix.from_array(np.random.default_rng(0).normal(size=(3, 4)))
        with pytest.raises(InvalidInputError):
            run_cluster_forests(data, CFConfig(T=2, n_f=4))


class TestAffinityExport:

    def test_binary_round_trip(self, tmp_path):
        P = co_association([np.array([0, 0, 1]), np.array([0, 1, 1])])
        path = tmp_path / 'affinity.bin'
        export_affinity_binary(path, P)
        assert path.stat().st_size == 8 + 8 * 9
        np.testing.assert_array_equal(read_affinity_binary(path), P.values)

    def test_binary_truncated(self, tmp_path):
        path = tmp_path / 'short.bin'
        path.write_bytes(np.array([3], dtype='<u8').tobytes() + b'\x00' * 8)
        with pytest.raises(InvalidInputError):
            read_affinity_binary(path)

    def test_csv_is_exact(self, tmp_path):
        W = regularize(co_association([np.array([0, 0, 1, 2]), np.array([0, 1, 1, 2])]), 10.0, 0.4)
        path = tmp_path / 'affinity.csv'
        export_affinity_csv(path, W, {'seed': 0})
        assert path.read_text().startswith('# seed=0\n0,1,2,3\n')
        np.testing.assert_array_equal(pd.read_csv(path, comment='#').to_numpy(), W)


def _benchmark(name, classes, q=1, runs=20):
    data, truth = load_csv(dataset_path(name), label_column='label')
    data = standardize(data)
    r, c = [], []
    for seed in range(runs):
        cfg = CFConfig(n_f=classes, growth=GrowthConfig(q=q), seed=seed, threads=4)
        labels, _, _ = run_cluster_forests(data, cfg)
        r.append(rho_r(labels, truth))
        c.append(100.0 * rho_c(labels, truth))
    return np.mean(r), np.mean(c)


@pytest.mark.slow
@pytest.mark.parametrize('name, classes, rand_index, accuracy', [
    ('soybean', 4, 92.36, 84.43),
    ('wine', 3, 79.70, 79.19),
    ('wdbc', 2, 79.66, 88.70),
    ('heart', 2, 56.90, 68.26),
])
def test_benchmark_scores(name, classes, rand_index, accuracy):
    mean_r, mean_c = _benchmark(name, classes)
    assert mean_r == pytest.approx(rand_index, abs=3.0)
    assert mean_c == pytest.approx(accuracy, abs=3.0)


@pytest.mark.slow
def test_competition_helps_heart():
    assert _benchmark('heart', 2, q=10)[1] >= _benchmark('heart', 2, q=1)[1] + 4.0


@pytest.mark.slow
def test_competition_hurts_wine():
    assert _benchmark('wine', 3, q=1)[1] >= _benchmark('wine', 3, q=10)[1] + 4.0


@pytest.mark.slow
def test_soybean_affinity_is_block_diagonal():
    data, truth = load_csv(dataset_path('soybean'), label_column='label')
    _, P, _ = run_cluster_forests(standardize(data), CFConfig(n_f=4, seed=0, threads=4))
    assert P.block_contrast(truth) > 0.0


@pytest.mark.slow
@pytest.mark.parametrize('preset, q', [(preset_g2, 20), (preset_g3, 50)])
def test_noisy_mixture_accuracy(preset, q):
    spec = preset(0)
    data, truth = sample_gaussian_mixture(spec, 2000, 1)
    labels, _, _ = run_cluster_forests(data, CFConfig(n_f=2, growth=GrowthConfig(q=q), seed=0, threads=4))
    assert rho_c(labels, truth) >= 0.95
