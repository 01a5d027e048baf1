#
# spectral.py -- symmetrically normalized spectral clustering: recursive normalized
# cut bipartitions, with a top-k eigenvector embedding variant.
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

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.linalg import eigh
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

import micro_logging as logging
from base_cluster import FeatureView, InfeasibleClustersError, kmeans
from data import LabelVector
from utils import ClusterForestsError, relabel_first_appearance

SYMMETRY_TOLERANCE = 1e-9
METHOD_NCUT = 'ncut'
METHOD_NJW = 'njw'


class IsolatedVertexError(ClusterForestsError):
    pass


class InvalidInputError(ClusterForestsError):
    pass


@dataclass(frozen=True, eq=False)
class AffinityGraph:
    weights: np.ndarray
    degrees: np.ndarray = None

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
            raise InvalidInputError(f'affinity must be square, got shape {weights.shape}')
        scale = max(1.0, float(np.abs(weights).max(initial=0.0)))
        if not np.allclose(weights, weights.T, rtol=0.0, atol=SYMMETRY_TOLERANCE * scale):
            raise InvalidInputError('affinity is not symmetric')
        if np.any(weights < 0.0):
            raise InvalidInputError('affinity has negative weights')
        degrees = weights.sum(axis=1)
        if np.any(degrees <= 0.0):
            raise IsolatedVertexError(f'vertex {int(np.argmin(degrees))} has zero degree')
        weights.setflags(write=False)
        degrees.setflags(write=False)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'degrees', degrees)

    @property
    def n(self):
        return self.weights.shape[0]

    def components(self) -> Tuple[int, np.ndarray]:
        return _components(self.weights)


def _components(weights):
    count, labels = connected_components(csr_matrix(weights != 0.0), directed=False)
    return int(count), labels


def scaled_operator(weights, degrees) -> np.ndarray:
    """D^-1/2 W D^-1/2, symmetrized."""
    inv_root = 1.0 / np.sqrt(degrees)
    operator = weights * inv_root[:, None] * inv_root[None, :]
    return 0.5 * (operator + operator.T)


def normalized_operator(g: AffinityGraph) -> np.ndarray:
    return scaled_operator(g.weights, g.degrees)


def top_eigenpairs(operator: np.ndarray, count: int):
    """largest `count` eigenpairs of a dense symmetric matrix, descending."""
    m = operator.shape[0]
    values, vectors = eigh(operator, subset_by_index=[m - count, m - 1])
    return values[::-1], vectors[:, ::-1]


def second_eigenpair(operator: np.ndarray):
    """
    eigenpair for the second largest eigenvalue. the sign is fixed so the
    largest-magnitude component (lowest index on ties) is positive.
    """
    values, vectors = top_eigenpairs(operator, 2)
    vector = vectors[:, 1]
    pivot = int(np.argmax(np.abs(vector)))
    if vector[pivot] < 0.0:
        vector = -vector
    return float(values[1]), vector


def sign_split(vector, cutoff=0.0) -> np.ndarray:
    """True for components above the cutoff; falls back to a median split by rank."""
    side = vector > cutoff
    if side.all() or not side.any():
        if logging.should_log(logging.DEBUG):
            logging.debug(f'one-signed eigenvector over {vector.size} points, median split', 'spectral:sign_split')
        order = np.argsort(vector, kind='stable')
        side = np.zeros(vector.size, dtype=bool)
        side[order[vector.size // 2:]] = True
    return side


def ncut_value(weights, side) -> float:
    side = np.asarray(side, dtype=bool)
    cut = float(weights[np.ix_(side, ~side)].sum())
    if cut == 0.0:
        return 0.0
    vol_in = float(weights[side].sum())
    vol_out = float(weights[~side].sum())
    return cut / vol_in + cut / vol_out


def _split(weights):
    """best bipartition of a (sub)graph: a component first, else the eigenvector sign."""
    count, labels = _components(weights)
    if count > 1:
        side = labels != labels[0]
        return 0.0, side
    degrees = weights.sum(axis=1)
    _, vector = second_eigenpair(scaled_operator(weights, degrees))
    side = sign_split(vector)
    return ncut_value(weights, side), side


def ncut_bipartition(g: AffinityGraph):
    if g.n < 2:
        raise InvalidInputError(f'cannot bipartition {g.n} points')
    _, side = _split(g.weights)
    return LabelVector(relabel_first_appearance(side.astype(np.int64)), 2)


def spectral_cluster(g: AffinityGraph, k: int):
    """
    recursive bipartition: each round splits the cluster whose best bipartition has the
    smallest normalized cut (lowest contained index on ties) until there are k clusters.
    """
    if k < 2:
        raise InvalidInputError(f'k must be >= 2, got {k}')
    if k > g.n:
        raise InfeasibleClustersError(f'cannot form {k} clusters from {g.n} points')
    weights = g.weights
    clusters = [np.arange(g.n)]
    splits = {}
    while len(clusters) < k:
        best = None
        for position, members in enumerate(clusters):
            if members.size < 2:
                continue
            key = int(members[0]), members.size
            if key not in splits:
                splits[key] = _split(weights[np.ix_(members, members)])
            value, side = splits[key]
            rank = (value, int(members[0]))
            if best is None or rank < best[0]:
                best = (rank, position, side)
        _, position, side = best
        members = clusters.pop(position)
        clusters[position:position] = [members[~side], members[side]]
        if logging.should_log(logging.DEBUG):
            logging.debug(f'split {members.size} -> {int((~side).sum())} + {int(side.sum())}, ncut={best[0][0]:.6g}',
                          'spectral:spectral_cluster')
    labels = np.empty(g.n, dtype=np.int64)
    for cluster_id, members in enumerate(clusters):
        labels[members] = cluster_id
    return LabelVector(relabel_first_appearance(labels), k)


def njw_cluster(g: AffinityGraph, k: int, seed=0):
    """k-means on the row-normalized top-k eigenvectors of the normalized operator."""
    if k < 2:
        raise InvalidInputError(f'k must be >= 2, got {k}')
    if k > g.n:
        raise InfeasibleClustersError(f'cannot form {k} clusters from {g.n} points')
    _, vectors = top_eigenpairs(normalized_operator(g), k)
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    embedding = vectors / np.where(norms > 0.0, norms, 1.0)
    part = kmeans(FeatureView.of_array(embedding), k, seed)
    return LabelVector(relabel_first_appearance(part.assignments), k)


def cluster_affinity(g: AffinityGraph, k: int, method=METHOD_NCUT, seed=0):
    if method == METHOD_NCUT:
        return spectral_cluster(g, k)
    if method == METHOD_NJW:
        return njw_cluster(g, k, seed)
    raise InvalidInputError(f'unknown spectral method {method!r}')
