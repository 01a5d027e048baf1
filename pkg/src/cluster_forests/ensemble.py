#
# ensemble.py -- the cluster forests driver: grow clustering vectors, base-cluster each
# one, average the co-cluster indicators, regularize, and cluster the affinity.
#
__author__ = 'J. B. Otterson'
__copyright__ = """
Copyright 2026, J. B. Otterson N1KDO.
Redistribution and use in source and binary forms, with or without modification,
are permitted provided that the following conditions are met:
  1. Redistributions of source code must retain the above copyright notice,
     this list of conditions and the following disclaimer.
  2. Redistributions in binary form must reproduce the above copyright notice,
     this list of conditions and the following disclaimer in the documentation
     and/or other materials provided with the distribution.
THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS "AS IS" AND
ANY EXPRESS OR IMPLIED WARRANTIES, INCLUDING, BUT NOT LIMITED TO, THE IMPLIED
WARRANTIES OF MERCHANTABILITY AND FITNESS FOR A PARTICULAR PURPOSE ARE DISCLAIMED.
IN NO EVENT SHALL THE COPYRIGHT HOLDER OR CONTRIBUTORS BE LIABLE FOR ANY DIRECT,
INDIRECT, INCIDENTAL, SPECIAL, EXEMPLARY, OR CONSEQUENTIAL DAMAGES (INCLUDING,
BUT NOT LIMITED TO, PROCUREMENT OF SUBSTITUTE GOODS OR SERVICES; LOSS OF USE,
DATA, OR PROFITS; OR BUSINESS INTERRUPTION) HOWEVER CAUSED AND ON ANY THEORY OF
LIABILITY, WHETHER IN CONTRACT, STRICT LIABILITY, OR TORT (INCLUDING NEGLIGENCE
OR OTHERWISE) ARISING IN ANY WAY OUT OF THE USE OF THIS SOFTWARE, EVEN IF ADVISED
OF THE POSSIBILITY OF SUCH DAMAGE.
"""
__version__ = '1.0.0'

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.spatial.distance import squareform

import micro_logging as logging
from base_cluster import count_distinct_points, kmeans
from data import DataMatrix, LabelVector
from growth import ClusteringVector, GrowthConfig, grow_vectors
from spectral import METHOD_NCUT, METHOD_NJW, AffinityGraph, InvalidInputError, cluster_affinity
from utils import draw_seed, make_rng, milliseconds, write_table

REGULARIZE_ZERO = 'zero'  # thresholded entries stay 0 after scaling
REGULARIZE_EXP = 'exp'  # threshold, then exp() of everything, so cut entries become 1

AFFINITY_HEADER_DTYPE = np.dtype('<u8')
AFFINITY_VALUE_DTYPE = np.dtype('<f8')


@dataclass(frozen=True, eq=False)
class CoAssociationMatrix:
    """fraction of ensemble members placing each pair together. upper triangle only; diagonal is 1."""
    condensed: np.ndarray
    n: int

    def __post_init__(self):
        condensed = np.array(self.condensed, dtype=np.float64).reshape(-1)
        n = int(self.n)
        if condensed.size != n * (n - 1) // 2:
            raise InvalidInputError(f'{condensed.size} pair entries do not fit n={n}')
        if condensed.size and (condensed.min() < 0.0 or condensed.max() > 1.0):
            raise InvalidInputError('co-association entries must lie in [0, 1]')
        condensed.setflags(write=False)
        object.__setattr__(self, 'condensed', condensed)
        object.__setattr__(self, 'n', n)

    @classmethod
    def from_dense(cls, values):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise InvalidInputError(f'co-association must be square, got shape {values.shape}')
        if not np.array_equal(values, values.T):
            raise InvalidInputError('co-association is not symmetric')
        if not np.all(np.diag(values) == 1.0):
            raise InvalidInputError('co-association diagonal must be 1')
        return cls(squareform(values, checks=False), values.shape[0])

    @property
    def values(self) -> np.ndarray:
        dense = squareform(self.condensed)
        np.fill_diagonal(dense, 1.0)
        return dense

    def block_contrast(self, labels) -> float:
        """mean within-class entry minus mean between-class entry, off the diagonal."""
        labels = np.asarray(getattr(labels, 'labels', labels)).reshape(-1)
        i, j = np.triu_indices(self.n, k=1)
        same = labels[i] == labels[j]
        if not same.any() or same.all():
            raise InvalidInputError('block contrast needs both within and between pairs')
        return float(self.condensed[same].mean() - self.condensed[~same].mean())


@dataclass(frozen=True)
class CFConfig:
    T: int = 100
    growth: GrowthConfig = field(default_factory=GrowthConfig)
    beta1: float = 10.0
    beta2: float = 0.4
    n_b: Optional[int] = None  # None: same as n_f
    n_f: int = 2
    seed: int = 0
    regularize: str = REGULARIZE_ZERO
    spectral_method: str = METHOD_NCUT
    threads: int = 1

    def __post_init__(self):
        if self.T < 1:
            raise InvalidInputError(f'T must be >= 1, got {self.T}')
        if not 0.0 < self.beta2 < 1.0:
            raise InvalidInputError(f'beta2 must be in (0, 1), got {self.beta2}')
        if self.n_f < 2:
            raise InvalidInputError(f'n_f must be >= 2, got {self.n_f}')
        if self.n_b is not None and self.n_b < 2:
            raise InvalidInputError(f'n_b must be >= 2, got {self.n_b}')
        if self.regularize not in (REGULARIZE_ZERO, REGULARIZE_EXP):
            raise InvalidInputError(f'unknown regularize mode {self.regularize!r}')
        if self.spectral_method not in (METHOD_NCUT, METHOD_NJW):
            raise InvalidInputError(f'unknown spectral method {self.spectral_method!r}')

    @property
    def base_clusters(self):
        return self.n_f if self.n_b is None else self.n_b


@dataclass
class CFDiagnostics:
    vectors: List[ClusteringVector] = field(default_factory=list)
    reduced_members: int = 0  # members whose view could not hold n_b clusters
    elapsed_ms: int = 0

    @property
    def kappas(self) -> List[float]:
        return [v.kappa_value for v in self.vectors]

    @property
    def features(self) -> List[Tuple[int, ...]]:
        return [v.features for v in self.vectors]

    @property
    def traces(self) -> List[List[float]]:
        return [v.trace for v in self.vectors]


def co_cluster_indicator(part) -> np.ndarray:
    assignments = np.asarray(getattr(part, 'assignments', part)).reshape(-1)
    return (assignments[:, None] == assignments[None, :]).astype(np.float64)


def aggregate(indicators: Sequence[np.ndarray]) -> CoAssociationMatrix:
    if len(indicators) == 0:
        raise InvalidInputError('cannot aggregate an empty ensemble')
    n = np.asarray(indicators[0]).shape[0]
    total = np.zeros((n, n), dtype=np.float64)
    for indicator in indicators:  # fixed order keeps the sum bitwise reproducible
        indicator = np.asarray(indicator, dtype=np.float64)
        if indicator.shape != (n, n):
            raise InvalidInputError(f'indicator shape {indicator.shape} != {(n, n)}')
        total += indicator
    return CoAssociationMatrix.from_dense(total / len(indicators))


def co_association(assignments_list: Sequence[np.ndarray]) -> CoAssociationMatrix:
    """same mean as aggregate(), straight from member assignments, without n x n indicators."""
    if len(assignments_list) == 0:
        raise InvalidInputError('cannot aggregate an empty ensemble')
    n = np.asarray(assignments_list[0]).size
    i, j = np.triu_indices(n, k=1)
    counts = np.zeros(i.size, dtype=np.int64)
    for assignments in assignments_list:
        assignments = np.asarray(assignments).reshape(-1)
        if assignments.size != n:
            raise InvalidInputError(f'member labels {assignments.size} points, expected {n}')
        counts += assignments[i] == assignments[j]
    return CoAssociationMatrix(counts / float(len(assignments_list)), n)


def regularize(P, beta1: float, beta2: float, mode: str = REGULARIZE_ZERO) -> np.ndarray:
    if not 0.0 < beta2 < 1.0:
        raise InvalidInputError(f'beta2 must be in (0, 1), got {beta2}')
    values = P.values if isinstance(P, CoAssociationMatrix) else np.asarray(P, dtype=np.float64)
    kept = values >= beta2
    if mode == REGULARIZE_ZERO:
        return np.where(kept, np.exp(beta1 * values), 0.0)
    if mode == REGULARIZE_EXP:
        return np.exp(beta1 * np.where(kept, values, 0.0))
    raise InvalidInputError(f'unknown regularize mode {mode!r}')


def _base_cluster(data, vector: ClusteringVector, k: int, rng):
    """
    labels of the member's view with k clusters. the k-means run that accepted the
    vector is reused when it has k clusters; views with fewer distinct points use fewer.
    """
    if vector.partition is not None and vector.partition.k == k:
        return vector.partition.assignments, False
    view = vector.view(data)
    k_eff = min(k, count_distinct_points(view))
    if k_eff < 2:
        return np.zeros(data.n, dtype=np.int64), True
    part = kmeans(view, k_eff, draw_seed(rng))
    return part.assignments, k_eff < k


def run_cluster_forests(data: DataMatrix, cfg: CFConfig) -> Tuple[LabelVector, CoAssociationMatrix, CFDiagnostics]:
    start = milliseconds()
    growth = cfg.growth
    if growth.k != cfg.base_clusters:
        growth = replace(growth, k=cfg.base_clusters)
    if data.p < growth.b:
        raise InvalidInputError(f'cannot sample {growth.b} features from {data.p}')
    if cfg.n_f > data.n:
        raise InvalidInputError(f'cannot form {cfg.n_f} clusters from {data.n} points')

    vectors = grow_vectors(data, growth, cfg.T, cfg.seed, cfg.threads)
    members = Parallel(n_jobs=cfg.threads, prefer='threads')(
        delayed(_base_cluster)(data, vector, cfg.base_clusters, make_rng(cfg.seed, index, 1))
        for index, vector in enumerate(vectors))
    reduced = sum(1 for _, was_reduced in members if was_reduced)
    if reduced:
        logging.warning(f'{reduced} of {cfg.T} members clustered with fewer than {cfg.base_clusters} clusters',
                        'ensemble:run_cluster_forests')
    if logging.should_log(logging.DEBUG):
        for index, vector in enumerate(vectors):
            logging.debug(f'member {index} kappa={vector.kappa_value:.6g} features={vector.features}',
                          'ensemble:run_cluster_forests')

    P = co_association([assignments for assignments, _ in members])
    W = regularize(P, cfg.beta1, cfg.beta2, cfg.regularize)
    labels = cluster_affinity(AffinityGraph(W), cfg.n_f, cfg.spectral_method, draw_seed(make_rng(cfg.seed, cfg.T, 2)))
    diagnostics = CFDiagnostics(vectors, reduced, milliseconds() - start)
    logging.info(f'n={data.n} p={data.p} T={cfg.T} done in {diagnostics.elapsed_ms} ms', 'ensemble:run_cluster_forests')
    return labels, P, diagnostics


def _dense(matrix):
    return matrix.values if isinstance(matrix, CoAssociationMatrix) else np.asarray(matrix, dtype=np.float64)


def export_affinity_csv(path, matrix, metadata=None):
    values = _dense(matrix)
    frame = pd.DataFrame(values, columns=[str(c) for c in range(values.shape[1])])
    write_table(path, frame, metadata, float_format='%.17g')


def export_affinity_binary(path, matrix):
    """little-endian u64 n, then n*n row-major little-endian f64."""
    values = _dense(matrix)
    with open(path, 'wb') as outfile:
        outfile.write(np.array([values.shape[0]], dtype=AFFINITY_HEADER_DTYPE).tobytes())
        outfile.write(np.ascontiguousarray(values, dtype=AFFINITY_VALUE_DTYPE).tobytes())


def read_affinity_binary(path) -> np.ndarray:
    with open(path, 'rb') as infile:
        payload = infile.read()
    if len(payload) < AFFINITY_HEADER_DTYPE.itemsize:
        raise InvalidInputError(f'{path} is too short for an affinity header')
    n = int(np.frombuffer(payload[:AFFINITY_HEADER_DTYPE.itemsize], dtype=AFFINITY_HEADER_DTYPE)[0])
    body = payload[AFFINITY_HEADER_DTYPE.itemsize:]
    if len(body) != n * n * AFFINITY_VALUE_DTYPE.itemsize:
        raise InvalidInputError(f'{path} holds {len(body)} bytes, expected {n * n * AFFINITY_VALUE_DTYPE.itemsize}')
    return np.frombuffer(body, dtype=AFFINITY_VALUE_DTYPE).reshape(n, n).copy()
