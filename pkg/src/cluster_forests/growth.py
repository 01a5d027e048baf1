#
# growth.py -- growth of clustering vectors with feature competition.
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

#
# A clustering vector starts from the winner of a feature competition (q random
# b-feature samples, lowest kappa wins) and is then grown: b more features are
# sampled, k-means runs on the expanded view, and the expansion is kept only if
# kappa drops by more than KAPPA_RTOL relative. Growth ends after tau_max
# failures in a row.
#
# The incumbent's kappa comes from the run that accepted it and is never
# recomputed, so every probe is compared against a fixed reference. Views that
# cannot hold k clusters (too few distinct points) score +inf.
#

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

import micro_logging as logging
from base_cluster import (DEFAULT_MAX_ITER, DEFAULT_RESTARTS, FeatureView, InfeasibleClustersError,
                          Partition, kappa, kmeans)
from utils import ClusterForestsError, KAPPA_INFINITY, draw_seed, make_rng

STOP_TAU = 'tau'
STOP_ATTEMPT_ALL = 'attempt_all'

# rescaling a view leaves kappa unchanged up to rounding
KAPPA_RTOL = 1e-12


@dataclass(frozen=True)
class GrowthConfig:
    b: int = 2
    q: int = 1
    tau_max: int = 3
    k: int = 2
    distinct: bool = False
    stopping: str = STOP_TAU
    max_iter: int = DEFAULT_MAX_ITER
    restarts: int = DEFAULT_RESTARTS

    def __post_init__(self):
        if self.b < 1 or self.q < 1 or self.tau_max < 1 or self.k < 2:
            raise ClusterForestsError(f'bad growth config b={self.b} q={self.q} '
                                      f'tau_max={self.tau_max} k={self.k}')
        if self.stopping not in (STOP_TAU, STOP_ATTEMPT_ALL):
            raise ClusterForestsError(f'unknown stopping rule {self.stopping!r}')


@dataclass(frozen=True, eq=False)
class ClusteringVector:
    features: Tuple[int, ...]
    kappa_value: float
    partition: Optional[Partition] = None
    trace: List[float] = field(default_factory=list)
    attempts: int = 0

    def __len__(self):
        return len(self.features)

    def view(self, data):
        return FeatureView(data, self.features)


def _score(data, columns, cfg: GrowthConfig, rng):
    view = FeatureView(data, columns)
    try:
        part = kmeans(view, cfg.k, draw_seed(rng), cfg.max_iter, cfg.restarts)
    except InfeasibleClustersError:
        return KAPPA_INFINITY, None
    return kappa(view, part), part


def _sample(p, b, rng, exclude=()):
    pool = np.setdiff1d(np.arange(p), np.asarray(exclude, dtype=np.int64)) if exclude else np.arange(p)
    if pool.size < b:
        return None
    return tuple(int(f) for f in rng.choice(pool, size=b, replace=False))


def _compete(data, cfg: GrowthConfig, rng):
    best = None
    for _ in range(cfg.q):
        sample = _sample(data.p, cfg.b, rng)
        score, part = _score(data, sample, cfg, rng)
        if best is None or score < best[1]:  # ties keep the earliest sample
            best = (sample, score, part)
    return best


def feature_competition(data, cfg: GrowthConfig, rng) -> Tuple[List[int], float]:
    if data.p < cfg.b:
        raise ClusterForestsError(f'cannot sample {cfg.b} features from {data.p}')
    features, score, _ = _compete(data, cfg, make_rng(rng))
    return list(features), score


def _probe_order(p, b, rng):
    order = rng.permutation(p)
    return [tuple(int(f) for f in order[i:i + b]) for i in range(0, p, b)]


def grow_clustering_vector(data, cfg: GrowthConfig, rng) -> ClusteringVector:
    if data.p < cfg.b:
        raise ClusterForestsError(f'cannot sample {cfg.b} features from {data.p}')
    rng = make_rng(rng)
    features, current, part = _compete(data, cfg, rng)
    trace = [current]
    attempts = 0

    def probe(sample):
        nonlocal features, current, part
        score, new_part = _score(data, features + sample, cfg, rng)
        accepted = score < current * (1.0 - KAPPA_RTOL)
        if accepted:
            features, current, part = features + sample, score, new_part
            trace.append(score)
        if logging.should_log(logging.DEBUG):
            logging.debug(f'{"accept" if accepted else "reject"} {sample} kappa={score:.6g}',
                          'growth:grow_clustering_vector')
        return accepted

    if cfg.stopping == STOP_TAU:
        tau = 0
        while tau < cfg.tau_max:
            sample = _sample(data.p, cfg.b, rng, features if cfg.distinct else ())
            if sample is None:
                break
            attempts += 1
            tau = 0 if probe(sample) else tau + 1
    else:
        for sample in _probe_order(data.p, cfg.b, rng):
            if cfg.distinct:
                sample = tuple(f for f in sample if f not in features)
                if not sample:
                    continue
            attempts += 1
            probe(sample)

    return ClusteringVector(tuple(features), current, part, trace, attempts)


def grow_vectors(data, cfg: GrowthConfig, count: int, seed, threads: int = 1) -> List[ClusteringVector]:
    """grow `count` vectors, vector l on stream (seed, l); order and result do not depend on threads."""
    return Parallel(n_jobs=threads, prefer='threads')(
        delayed(grow_clustering_vector)(data, cfg, make_rng(seed, index)) for index in range(count))


def feature_occurrence(vectors: Sequence[ClusteringVector], p: int) -> np.ndarray:
    """vectors x features matrix of how many times each feature appears in each vector."""
    counts = np.zeros((len(vectors), p), dtype=np.int64)
    for row, vector in enumerate(vectors):
        np.add.at(counts[row], np.asarray(vector.features, dtype=np.int64), 1)
    return counts
