import numpy as np
import pytest

from baselines import (EA_THRESHOLDS, METHOD_BC2, METHOD_EA, METHOD_RP, BaselineConfig, UnknownMethodError,
                       random_projection, random_projection_ensemble, run_baseline, search_ea_threshold,
                       search_rp_dimension, single_linkage)
from conftest import dataset_path
from data import load_csv, standardize
from ensemble import CoAssociationMatrix, co_association
from metrics import rho_c
from spectral import InvalidInputError


def _affinity(dense):
    return CoAssociationMatrix.from_dense(np.asarray(dense, dtype=np.float64))


class TestSingleLinkage:

    def test_identity_gives_singletons(self):
        result = single_linkage(_affinity(np.eye(5)), threshold=0.5)
        np.testing.assert_array_equal(result.labels.labels, np.arange(5))
        assert result.degenerate

    def test_two_blocks_target_k(self):
        labels = np.repeat([0, 1], [3, 4])
        P = co_association([labels])
        result = single_linkage(P, k=2)
        np.testing.assert_array_equal(result.labels.labels, labels)
        assert not result.degenerate

    def test_hand_traced_merges(self):
        dense = np.eye(4)
        for (i, j), value in {(0, 1): 0.9, (2, 3): 0.8, (1, 2): 0.4}.items():
            dense[i, j] = dense[j, i] = value
        result = single_linkage(_affinity(dense), threshold=0.5)
        np.testing.assert_array_equal(result.labels.labels, [0, 0, 1, 1])
        merged = single_linkage(_affinity(dense), threshold=0.4)
        np.testing.assert_array_equal(merged.labels.labels, [0, 0, 0, 0])
        assert merged.degenerate

    @pytest.mark.parametrize('k', [1, 2, 3, 6])
    def test_exactly_k(self, k):
        rng = np.random.default_rng(k)
        P = co_association([rng.integers(0, 3, size=6) for _ in range(5)])
        assert np.unique(single_linkage(P, k=k).labels.labels).size == k

    def test_needs_one_mode(self):
        P = _affinity(np.eye(3))
        with pytest.raises(InvalidInputError):
            single_linkage(P)
        with pytest.raises(InvalidInputError):
            single_linkage(P, threshold=0.5, k=2)
        with pytest.raises(InvalidInputError):
            single_linkage(P, k=4)


class TestBaselineConfig:

    def test_unknown_method(self):
        with pytest.raises(UnknownMethodError):
            BaselineConfig('kmeans')

    @pytest.mark.parametrize('kwargs', [{'T': 0}, {'n_f': 1}, {'t': 1.0}, {'t': 0.0}])
    def test_invalid_ea(self, kwargs):
        with pytest.raises(InvalidInputError):
            BaselineConfig(METHOD_EA, **kwargs)

    def test_base_clusters(self):
        assert BaselineConfig(METHOD_EA).base_clusters(100) == 10
        assert BaselineConfig(METHOD_RP, n_f=3).base_clusters(100) == 3
        assert BaselineConfig(METHOD_EA, n_b=4).base_clusters(100) == 4


class TestEvidenceAccumulation:

    @pytest.mark.parametrize('t', EA_THRESHOLDS)
    def test_far_blobs_any_threshold(self, small_blobs, t):
        data, truth = small_blobs
        labels = run_baseline(data, BaselineConfig(METHOD_EA, T=5, n_b=2, t=t, seed=1))
        assert rho_c(labels, truth) == 1.0

    def test_default_base_clusters(self, small_blobs):
        data, _ = small_blobs
        labels = run_baseline(data, BaselineConfig(METHOD_EA, T=10, seed=2))
        assert 1 <= labels.num_classes < data.n

    def test_deterministic(self, small_blobs):
        data, _ = small_blobs
        cfg = BaselineConfig(METHOD_EA, T=6, seed=7)
        np.testing.assert_array_equal(run_baseline(data, cfg).labels,
                                      run_baseline(data, BaselineConfig(METHOD_EA, T=6, seed=7, threads=3)).labels)


class TestRandomProjection:

    def test_gaussian_scale(self):
        R = random_projection(400, 50, np.random.default_rng(0))
        assert R.shape == (50, 400)
        assert np.mean(R ** 2) == pytest.approx(1.0 / 50.0, rel=0.05)

    def test_orthonormal_rows(self):
        R = random_projection(6, 4, np.random.default_rng(1), orthonormal=True)
        np.testing.assert_allclose(R @ R.T, np.eye(4), atol=1e-12)

    def test_full_orthonormal_preserves_distances(self, small_blobs):
        data, _ = small_blobs
        R = random_projection(data.p, data.p, np.random.default_rng(2), orthonormal=True)
        projected = data.values @ R.T
        np.testing.assert_allclose(np.linalg.norm(projected[0] - projected[1]),
                                   np.linalg.norm(data.values[0] - data.values[1]), rtol=1e-12)

    @pytest.mark.parametrize('orthonormal', [False, True])
    def test_far_blobs(self, small_blobs, orthonormal):
        data, truth = small_blobs
        cfg = BaselineConfig(METHOD_RP, T=10, dim=2, seed=3, orthonormal=orthonormal)
        assert rho_c(run_baseline(data, cfg), truth) == 1.0

    def test_dimension_above_p(self, small_blobs):
        data, _ = small_blobs
        with pytest.raises(InvalidInputError):
            random_projection_ensemble(data, BaselineConfig(METHOD_RP, dim=data.p + 1))


class TestBaggedClustering:

    def test_far_blobs(self, small_blobs):
        data, truth = small_blobs
        for T in (1, 4):
            labels = run_baseline(data, BaselineConfig(METHOD_BC2, T=T, seed=5))
            assert rho_c(labels, truth) == 1.0

    def test_labels_first_appearance(self, small_blobs):
        data, _ = small_blobs
        labels = run_baseline(data, BaselineConfig(METHOD_BC2, T=3, seed=6))
        assert labels.labels[0] == 0


class TestSearch:

    def test_ea_threshold(self):
        best, value, table = search_ea_threshold(BaselineConfig(METHOD_EA), lambda c: -abs(c.t - 0.6))
        assert best.t == 0.6
        assert value == 0.0
        assert [c.t for c, _ in table] == list(EA_THRESHOLDS)

    def test_ties_keep_first(self):
        best, _, _ = search_ea_threshold(BaselineConfig(METHOD_EA), lambda c: 1.0)
        assert best.t == EA_THRESHOLDS[0]

    def test_rp_dimension(self):
        best, _, table = search_rp_dimension(BaselineConfig(METHOD_RP), 8, lambda c: c.dim % 3)
        assert [c.dim for c, _ in table] == [5, 6, 7, 8]
        assert best.dim == 5

    def test_rp_dimension_small_p(self):
        _, _, table = search_rp_dimension(BaselineConfig(METHOD_RP), 3, lambda c: 0.0)
        assert [c.dim for c, _ in table] == [3]


@pytest.mark.slow
def test_bagged_clustering_wdbc():
    data, truth = load_csv(dataset_path('wdbc'), label_column='label')
    data = standardize(data)
    scores = [rho_c(run_baseline(data, BaselineConfig(METHOD_BC2, seed=seed)), truth) for seed in range(20)]
    assert 100.0 * np.mean(scores) == pytest.approx(85.38, abs=3.0)
