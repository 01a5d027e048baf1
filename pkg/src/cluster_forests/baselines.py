#
# baselines.py -- comparison ensembles: evidence accumulation, random projection and
# bagged clustering, with the single linkage agglomerator they share.
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

import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.cluster.hierarchy import cut_tree, fcluster, linkage

import micro_logging as logging
from base_cluster import FeatureView, assign_to_centers, count_distinct_points, kmeans
from data import DataMatrix, LabelVector
from ensemble import CoAssociationMatrix, co_association
from metrics import match_labels
from spectral import InvalidInputError
from utils import ClusterForestsError, draw_seed, make_rng, relabel_first_appearance

METHOD_EA = 'ea'
METHOD_RP = 'rp'
METHOD_BC2 = 'bc2'
METHODS = (METHOD_EA, METHOD_RP, METHOD_BC2)

EA_THRESHOLDS = (0.3, 0.4, 0.5, 0.6, 0.7, 0.75)
RP_MIN_DIMENSION = 5


class UnknownMethodError(ClusterForestsError):
    pass


@dataclass(frozen=True)
class BaselineConfig:
    method: str
    T: int = 100
    n_b: Optional[int] = None  # None: sqrt(n) for EA, n_f otherwise
    n_f: int = 2
    t: float = 0.5
    dim: int = RP_MIN_DIMENSION
    seed: int = 0
    orthonormal: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise UnknownMethodError(f'unknown baseline method {self.method!r}')
        if self.T < 1 or self.n_f < 2:
            raise InvalidInputError(f'bad baseline config T={self.T} n_f={self.n_f}')
        if self.method == METHOD_EA and not 0.0 < self.t < 1.0:
            raise InvalidInputError(f'EA threshold must be in (0, 1), got {self.t}')
        if self.method == METHOD_RP and self.dim < 1:
            raise InvalidInputError(f'RP dimension must be >= 1, got {self.dim}')

    def base_clusters(self, n):
        if self.n_b is not None:
            return self.n_b
        if self.method == METHOD_EA:
            return max(2, int(round(math.sqrt(n))))
        return self.n_f


@dataclass(frozen=True, eq=False)
class LinkageResult:
    labels: LabelVector
    degenerate: bool = False  # threshold mode gave 1 or n clusters


def single_linkage(affinity: CoAssociationMatrix, threshold: float = None, k: int = None) -> LinkageResult:
    """
    agglomerate on similarity. threshold mode keeps merging while the best inter-cluster
    similarity is >= threshold; target mode stops at exactly k clusters.
    """
    if (threshold is None) == (k is None):
        raise InvalidInputError('give exactly one of threshold or k')
    n = affinity.n
    if n == 1:
        return LinkageResult(LabelVector(np.zeros(1, dtype=np.int64), 1), True)
    tree = linkage(1.0 - affinity.condensed, method='single')
    if k is not None:
        if not 1 <= k <= n:
            raise InvalidInputError(f'cannot cut {n} points into {k} clusters')
        labels = relabel_first_appearance(cut_tree(tree, n_clusters=k).reshape(-1))
        return LinkageResult(LabelVector(labels, k))
    labels = relabel_first_appearance(fcluster(tree, t=1.0 - threshold, criterion='distance'))
    count = int(labels.max()) + 1
    return LinkageResult(LabelVector(labels, count), count == 1 or count == n)


def _member_assignments(points, k, rng):
    """one randomly started k-means run; fewer clusters if there are fewer distinct points."""
    k = min(k, count_distinct_points(points))
    if k < 2:
        return np.zeros(points.shape[0], dtype=np.int64)
    return kmeans(points, k, draw_seed(rng), restarts=1).assignments


def _run_members(cfg: BaselineConfig, member):
    return Parallel(n_jobs=cfg.threads, prefer='threads')(
        delayed(member)(make_rng(cfg.seed, index)) for index in range(cfg.T))


def evidence_accumulation(data: DataMatrix, cfg: BaselineConfig) -> LabelVector:
    k = cfg.base_clusters(data.n)
    points = data.values
    members = _run_members(cfg, lambda rng: _member_assignments(points, k, rng))
    affinity = co_association(members)
    result = single_linkage(affinity, threshold=cfg.t)
    count = result.labels.num_classes
    if count == 1 or count >= 0.5 * data.n:
        logging.warning(f'threshold {cfg.t} gave {count} clusters, cutting at {cfg.n_f} instead',
                        'baselines:evidence_accumulation')
        result = single_linkage(affinity, k=cfg.n_f)
    return result.labels


def random_projection(p, dim, rng, orthonormal=False) -> np.ndarray:
    """dim x p projection; gaussian entries scaled by 1/sqrt(dim), or orthonormal rows."""
    if orthonormal:
        q, _ = np.linalg.qr(rng.standard_normal((p, dim)))
        return q.T
    return rng.standard_normal((dim, p)) / math.sqrt(dim)


def random_projection_ensemble(data: DataMatrix, cfg: BaselineConfig) -> LabelVector:
    if cfg.dim > data.p:
        raise InvalidInputError(f'cannot project {data.p} features to {cfg.dim}')
    k = cfg.base_clusters(data.n)
    points = data.values

    def member(rng):
        projection = random_projection(data.p, cfg.dim, rng, cfg.orthonormal)
        return _member_assignments(points @ projection.T, k, rng)

    affinity = co_association(_run_members(cfg, member))
    return single_linkage(affinity, k=cfg.n_f).labels


def bagged_clustering(data: DataMatrix, cfg: BaselineConfig) -> LabelVector:
    k = cfg.n_f if cfg.n_b is None else cfg.n_b
    points = data.values

    def member(rng):
        rows = rng.integers(0, data.n, size=data.n)
        sample = data.take_rows(rows).values
        k_eff = min(k, count_distinct_points(sample))
        if k_eff < 2:
            return np.zeros(data.n, dtype=np.int64)
        part = kmeans(FeatureView.of_array(sample), k_eff, draw_seed(rng))
        return assign_to_centers(points, part.centers)

    members = _run_members(cfg, member)
    reference = members[0]
    votes = np.zeros((data.n, k), dtype=np.int64)
    rows = np.arange(data.n)
    for labels in members:
        matched = match_labels(reference, labels)
        inside = matched < k
        np.add.at(votes, (rows[inside], matched[inside]), 1)
    # argmax takes the lowest label on ties
    return LabelVector.from_labels(np.argmax(votes, axis=1))


def run_baseline(data: DataMatrix, cfg: BaselineConfig) -> LabelVector:
    if cfg.method == METHOD_EA:
        return evidence_accumulation(data, cfg)
    if cfg.method == METHOD_RP:
        return random_projection_ensemble(data, cfg)
    if cfg.method == METHOD_BC2:
        return bagged_clustering(data, cfg)
    raise UnknownMethodError(f'unknown baseline method {cfg.method!r}')


def _search(cfg: BaselineConfig, evaluate: Callable, candidates: Sequence[BaselineConfig]):
    table = []
    best = None
    for candidate in candidates:
        value = float(evaluate(candidate))
        table.append((candidate, value))
        if best is None or value > best[1]:  # first best wins ties
            best = (candidate, value)
        if logging.should_log(logging.DEBUG):
            logging.debug(f'{cfg.method} t={candidate.t} dim={candidate.dim} score={value:.6g}', 'baselines:_search')
    return best[0], best[1], table


def search_ea_threshold(cfg: BaselineConfig, evaluate: Callable,
                        grid: Sequence[float] = EA_THRESHOLDS) -> Tuple[BaselineConfig, float, List]:
    """best EA threshold by evaluate(config) -> score, higher is better."""
    return _search(cfg, evaluate, [replace(cfg, t=t) for t in grid])


def search_rp_dimension(cfg: BaselineConfig, p: int, evaluate: Callable,
                        start: int = RP_MIN_DIMENSION) -> Tuple[BaselineConfig, float, List]:
    """best RP dimension from `start` (or p, if smaller) up to p."""
    dims = range(min(start, p), p + 1)
    return _search(cfg, evaluate, [replace(cfg, dim=d) for d in dims])
