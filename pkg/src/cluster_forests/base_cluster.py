#
# base_cluster.py -- k-means base clustering and the kappa cluster quality measure
# over weighted feature-subset views.
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
# A view is the data restricted to an ordered multiset of columns. A column listed
# m times counts m times in squared distances, which is how a clustering vector
# weights its features.
#
# kappa = SS_W / SS_B where SS_W (SS_B) sums squared view distances over unordered
# point pairs in the same (different) clusters. Both are computed from cluster
# sizes, centroids and scatters instead of enumerating pairs.
#

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist, pdist

import micro_logging as logging
from utils import ClusterForestsError, KAPPA_INFINITY, make_rng

DEFAULT_MAX_ITER = 100
DEFAULT_RESTARTS = 5


class InfeasibleClustersError(ClusterForestsError):
    pass


@dataclass(frozen=True, eq=False)
class FeatureView:
    source: object  # DataMatrix, or anything with a 2-D .values
    columns: Tuple[int, ...]

    def __post_init__(self):
        columns = tuple(int(c) for c in self.columns)
        p = _source_values(self.source).shape[1]
        if not columns:
            raise ClusterForestsError('a feature view needs at least one column')
        for c in columns:
            if not 0 <= c < p:
                raise ClusterForestsError(f'feature index {c} outside 0..{p - 1}')
        object.__setattr__(self, 'columns', columns)

    @classmethod
    def of_array(cls, values):
        values = np.asarray(values, dtype=np.float64)
        return cls(_ArraySource(values), tuple(range(values.shape[1])))

    @property
    def n(self):
        return _source_values(self.source).shape[0]

    @property
    def dimension(self):
        return len(self.columns)

    def matrix(self) -> np.ndarray:
        return _source_values(self.source)[:, list(self.columns)]

    def extended(self, more_columns: Sequence[int]):
        return FeatureView(self.source, self.columns + tuple(more_columns))


class _ArraySource:
    def __init__(self, values):
        self.values = values


def _source_values(source):
    return source.values if hasattr(source, 'values') else np.asarray(source)


@dataclass(frozen=True, eq=False)
class Partition:
    assignments: np.ndarray
    k: int
    centers: np.ndarray
    inertia: float
    n_iter: int = 0
    inertia_history: List[float] = field(default_factory=list)

    @property
    def n(self):
        return self.assignments.size

    def sizes(self):
        return np.bincount(self.assignments, minlength=self.k)


def _as_points(view):
    if isinstance(view, FeatureView):
        return view.matrix()
    return np.asarray(view, dtype=np.float64)


def count_distinct_points(view) -> int:
    points = _as_points(view)
    return int(np.unique(points, axis=0).shape[0])


def plusplus_init(points: np.ndarray, k: int, rng) -> np.ndarray:
    """distance-squared weighted seeding."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    first = int(rng.integers(0, n))
    centers[0] = points[first]
    closest = cdist(points, centers[:1], 'sqeuclidean')[:, 0]
    for i in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # fewer distinct points than centers; callers check this first
            raise InfeasibleClustersError(f'cannot seed {k} distinct centers')
        pick = int(rng.choice(n, p=closest / total))
        centers[i] = points[pick]
        closest = np.minimum(closest, cdist(points, centers[i:i + 1], 'sqeuclidean')[:, 0])
    return centers


def _cluster_means(points, assignments, k):
    sizes = np.bincount(assignments, minlength=k).astype(np.float64)
    sums = np.zeros((k, points.shape[1]), dtype=np.float64)
    np.add.at(sums, assignments, points)
    return sums / np.maximum(sizes, 1.0)[:, None]


def _repair_empty(points, centers, assignments, d2):
    """reseed each empty center at the point farthest from its current center."""
    k = centers.shape[0]
    rows = np.arange(points.shape[0])
    for _ in range(k):
        empty = np.flatnonzero(np.bincount(assignments, minlength=k) == 0)
        if empty.size == 0:
            return assignments, centers, d2
        for c in empty:
            current = d2[rows, assignments]
            farthest = int(np.argmax(current))
            centers[c] = points[farthest]
            d2[:, c] = cdist(points, centers[c:c + 1], 'sqeuclidean')[:, 0]
            assignments = np.argmin(d2, axis=1)
    if np.any(np.bincount(assignments, minlength=k) == 0):
        raise InfeasibleClustersError('could not repair empty clusters')
    return assignments, centers, d2


def lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int = DEFAULT_MAX_ITER):
    """
    Lloyd iterations from the given centers until the assignments stop changing.
    returns (assignments, centers, inertia_history); the history is non-increasing.
    """
    points = np.asarray(points, dtype=np.float64)
    centers = np.array(centers, dtype=np.float64)
    k = centers.shape[0]
    rows = np.arange(points.shape[0])
    assignments = None
    history = []
    for _ in range(max(1, max_iter)):
        d2 = cdist(points, centers, 'sqeuclidean')
        new_assignments = np.argmin(d2, axis=1)  # ties go to the lowest index
        new_assignments, centers, d2 = _repair_empty(points, centers, new_assignments, d2)
        history.append(float(d2[rows, new_assignments].sum()))
        if assignments is not None and np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        centers = _cluster_means(points, assignments, k)
    else:
        # out of iterations: report against the means of the last assignment
        final = float(((points - centers[assignments]) ** 2).sum())
        if final < history[-1]:
            history.append(final)
    return assignments, centers, history


def kmeans(view, k: int, seed, max_iter: int = DEFAULT_MAX_ITER, restarts: int = DEFAULT_RESTARTS) -> Partition:
    points = _as_points(view)
    n = points.shape[0]
    if k < 1:
        raise InfeasibleClustersError(f'k must be >= 1, got {k}')
    distinct = count_distinct_points(points)
    if distinct < k:
        raise InfeasibleClustersError(f'{distinct} distinct points cannot form {k} clusters')
    rng = make_rng(seed)
    best = None
    for restart in range(max(1, restarts)):
        start = plusplus_init(points, k, rng)
        assignments, centers, history = lloyd(points, start, max_iter)
        inertia = history[-1]
        if best is None or inertia < best.inertia:
            best = Partition(assignments.astype(np.int64), k, centers, inertia, len(history), history)
    if logging.should_log(logging.DEBUG):
        logging.debug(f'n={n} d={points.shape[1]} k={k} inertia={best.inertia:.6g} iters={best.n_iter}',
                      'base_cluster:kmeans')
    return best


def kappa(view, part: Partition) -> float:
    points = _as_points(view)
    labels = np.asarray(part.assignments)
    present = np.unique(labels)
    if present.size < 2:
        raise InfeasibleClustersError('kappa needs at least two nonempty clusters')
    labels = np.searchsorted(present, labels)
    k = present.size
    n = points.shape[0]
    sizes = np.bincount(labels, minlength=k).astype(np.float64)
    means = _cluster_means(points, labels, k)
    scatter = np.zeros(k, dtype=np.float64)
    np.add.at(scatter, labels, ((points - means[labels]) ** 2).sum(axis=1))
    # sum over pairs inside C of |xi - xj|^2 = |C| * scatter(C)
    ss_w = float((sizes * scatter).sum())
    between_means = 0.5 * float((np.outer(sizes, sizes) * cdist(means, means, 'sqeuclidean')).sum())
    ss_b = float((scatter * (n - sizes)).sum()) + between_means
    if ss_b <= 0.0:
        return KAPPA_INFINITY
    return ss_w / ss_b


def kappa_bruteforce(view, part: Partition) -> float:
    """O(n^2) pair enumeration; the reference the fast path is checked against."""
    points = _as_points(view)
    labels = np.asarray(part.assignments)
    d2 = pdist(points, 'sqeuclidean')
    i, j = np.triu_indices(points.shape[0], k=1)
    same = labels[i] == labels[j]
    ss_w = float(d2[same].sum())
    ss_b = float(d2[~same].sum())
    if ss_b <= 0.0:
        return KAPPA_INFINITY
    return ss_w / ss_b


def assign_to_centers(points, centers) -> np.ndarray:
    """nearest-center labels, lowest index on ties."""
    return np.argmin(cdist(_as_points(points), np.asarray(centers, dtype=np.float64), 'sqeuclidean'), axis=1)
