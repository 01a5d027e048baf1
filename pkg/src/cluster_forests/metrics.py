#
# metrics.py -- pair agreement (rho_r) and matched accuracy (rho_c) of clusterings.
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

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from utils import ClusterForestsError


class LabelMismatchError(ClusterForestsError):
    pass


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    counts: np.ndarray  # true classes x predicted clusters

    @property
    def n(self):
        return int(self.counts.sum())


def _as_labels(labels):
    labels = getattr(labels, 'labels', labels)
    return np.asarray(labels).reshape(-1)


def _check_lengths(a, b, minimum=1):
    if a.size != b.size:
        raise LabelMismatchError(f'label vectors differ in length: {a.size} != {b.size}')
    if a.size < minimum:
        raise LabelMismatchError(f'need at least {minimum} labels, got {a.size}')


def contingency_table(truth, pred) -> ContingencyTable:
    truth = _as_labels(truth)
    pred = _as_labels(pred)
    _check_lengths(truth, pred)
    _, t = np.unique(truth, return_inverse=True)
    _, f = np.unique(pred, return_inverse=True)
    t = t.reshape(-1)
    f = f.reshape(-1)
    counts = np.zeros((t.max() + 1, f.max() + 1), dtype=np.int64)
    np.add.at(counts, (t, f), 1)
    return ContingencyTable(counts)


def _pairs(x):
    return x * (x - 1) // 2


def rho_r(a, b) -> float:
    """percent of unordered point pairs on which a and b agree about co-membership."""
    a = _as_labels(a)
    b = _as_labels(b)
    _check_lengths(a, b, minimum=2)
    counts = contingency_table(a, b).counts
    same_a = _pairs(counts.sum(axis=1)).sum()
    same_b = _pairs(counts.sum(axis=0)).sum()
    same_both = _pairs(counts).sum()
    disagree = same_a + same_b - 2 * same_both
    total = _pairs(a.size)
    return 100.0 * float(total - disagree) / float(total)


def rho_c(pred, truth) -> float:
    """
    fraction of points correctly labelled under the best one-to-one matching of
    predicted clusters to true classes. unequal counts are padded with empty rows
    or columns, so unmatched clusters score nothing.
    """
    counts = contingency_table(truth, pred).counts
    size = max(counts.shape)
    square = np.zeros((size, size), dtype=np.int64)
    square[:counts.shape[0], :counts.shape[1]] = counts
    rows, cols = linear_sum_assignment(square, maximize=True)
    return float(square[rows, cols].sum()) / float(counts.sum())


def rho_c_bruteforce(pred, truth) -> float:
    """exhaustive search over label permutations, for small tables only."""
    counts = contingency_table(truth, pred).counts
    size = max(counts.shape)
    square = np.zeros((size, size), dtype=np.int64)
    square[:counts.shape[0], :counts.shape[1]] = counts
    best = 0
    for perm in itertools.permutations(range(size)):
        best = max(best, int(square[np.arange(size), perm].sum()))
    return best / float(counts.sum())


def match_labels(reference, labels) -> np.ndarray:
    """relabel `labels` onto the label names of `reference` by the best matching."""
    reference = _as_labels(reference)
    labels = _as_labels(labels)
    _check_lengths(reference, labels)
    ref_values = np.unique(reference)
    lab_values = np.unique(labels)
    counts = contingency_table(labels, reference).counts  # labels x reference
    size = max(counts.shape)
    square = np.zeros((size, size), dtype=np.int64)
    square[:counts.shape[0], :counts.shape[1]] = counts
    rows, cols = linear_sum_assignment(square, maximize=True)
    mapping = {}
    spare = int(max(ref_values.max(), lab_values.max())) + 1
    for r, c in zip(rows, cols):
        if r >= lab_values.size:
            continue
        if c < ref_values.size:
            mapping[lab_values[r]] = ref_values[c]
        else:
            mapping[lab_values[r]] = spare
            spare += 1
    return np.array([mapping[v] for v in labels], dtype=np.int64)
