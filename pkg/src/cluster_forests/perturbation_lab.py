#
# perturbation_lab.py -- Monte-Carlo checks of the normalized cut mis-clustering rate
# under a planted two-block affinity with symmetric gaussian noise.
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
# The planted affinity has 1-nu inside the two blocks and nu across them. Noise is a
# symmetric matrix of independent N(0, sigma^2) entries, not clipped, so the operator
# D^-1/2 P D^-1/2 is built here directly instead of through AffinityGraph. Points are
# assigned by the sign of the second eigenvector (cutoff 0).
#

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import norm

import micro_logging as logging
from spectral import scaled_operator, second_eigenpair, top_eigenpairs
from utils import ClusterForestsError, make_rng

DEGREES_OBSERVED = 'observed'  # row sums of the noisy P
DEGREES_PLANTED = 'planted'  # row sums of the planted P, never negative

SWEEP_COLUMNS = ['gamma', 'sigma', 'nu', 'n', 'trials', 'mean_M', 'log_rate_emp', 'log_rate_theory']


@dataclass(frozen=True)
class PerturbationSpec:
    n1: int
    gamma: float
    nu: float
    sigma: float
    trials: int = 100
    seed: int = 0
    degrees: str = DEGREES_OBSERVED

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ClusterForestsError(f'gamma must be in (0, 1], got {self.gamma}')
        if not 0.0 <= self.nu < 0.5:
            raise ClusterForestsError(f'nu must be in [0, 1/2), got {self.nu}')
        if self.sigma < 0.0:
            raise ClusterForestsError(f'sigma must be >= 0, got {self.sigma}')
        if self.trials < 1:
            raise ClusterForestsError(f'trials must be >= 1, got {self.trials}')
        if self.n2 < 1:
            raise ClusterForestsError(f'n1={self.n1}, gamma={self.gamma} leaves the second block empty')
        if self.degrees not in (DEGREES_OBSERVED, DEGREES_PLANTED):
            raise ClusterForestsError(f'unknown degree source {self.degrees!r}')

    @property
    def n2(self):
        return int(round(self.gamma * self.n1))

    @property
    def n(self):
        return self.n1 + self.n2


@dataclass(frozen=True)
class RateEstimate:
    mean_M: float
    empirical: float  # (1/n) log(mean M); -inf when no trial misclustered anything
    theory: float
    completed: int
    aborted: int  # trials dropped for a nonpositive degree


@dataclass(frozen=True)
class ErrorProbabilities:
    first_block: float  # P(a first-block point lands on the wrong side)
    second_block: float
    expected_rate: float


@dataclass(frozen=True)
class EigenReport:
    lambda1: float
    lambda2: float
    lambda2_predicted: float
    lambda2_error: float
    x2_deviation: float  # max |scaled x2 - block value|
    x2_spread: float  # max within-block range of x2


@dataclass(frozen=True)
class CutoffShift:
    first_block_mean: float
    second_block_mean: float
    best_cutoff: float  # mean over trials of the error-minimizing cutoff


def planted_affinity(n1: int, n2: int, nu: float) -> np.ndarray:
    blocks = np.repeat([0, 1], [n1, n2])
    return np.where(blocks[:, None] == blocks[None, :], 1.0 - nu, nu)


def sample_perturbed(Pbar: np.ndarray, sigma: float, rng) -> np.ndarray:
    if sigma == 0.0:
        return np.array(Pbar, dtype=np.float64)
    n = Pbar.shape[0]
    lower = np.tril(rng.normal(0.0, sigma, size=(n, n)))
    return Pbar + lower + np.tril(lower, -1).T


def misclustering_rate(pred, n1: int, n2: int) -> float:
    """wrongly assigned fraction under the better of the two label matchings."""
    labels = np.asarray(getattr(pred, 'labels', pred)).reshape(-1)
    if labels.size != n1 + n2:
        raise ClusterForestsError(f'{labels.size} labels for {n1 + n2} points')
    if np.unique(labels).size > 2:
        raise ClusterForestsError('misclustering rate needs at most two clusters')
    side = labels != labels.min()
    wrong = float(np.mean(side != (np.arange(labels.size) >= n1)))
    return min(wrong, 1.0 - wrong)


def theory_rate(gamma: float, sigma: float) -> float:
    if sigma == 0.0:
        return -math.inf
    return -gamma ** 2 / (2.0 * sigma ** 2 * (1.0 + gamma) * (1.0 + gamma ** 3))


def theory_error_probabilities(n1: int, gamma: float, sigma: float) -> ErrorProbabilities:
    """finite-n gaussian tails whose weighted mean predicts the expected rate."""
    n = n1 + int(round(gamma * n1))
    if sigma == 0.0:
        return ErrorProbabilities(0.0, 0.0, 0.0)
    scale = math.sqrt(n) / sigma
    common = (1.0 + gamma) * (1.0 + gamma ** 3)
    first = float(norm.sf(scale * math.sqrt(gamma ** 2 / common)))
    second = float(norm.sf(scale * math.sqrt(gamma / common)))
    return ErrorProbabilities(first, second, (second + gamma * first) / (1.0 + gamma))


def _second_vector(spec: PerturbationSpec, Pbar, planted_degrees, index):
    rng = make_rng(spec.seed, index)
    P = sample_perturbed(Pbar, spec.sigma, rng)
    degrees = planted_degrees if spec.degrees == DEGREES_PLANTED else P.sum(axis=1)
    if np.any(degrees <= 0.0):
        return None
    _, vector = second_eigenpair(scaled_operator(P, degrees))
    return vector


def _trial(spec: PerturbationSpec, Pbar, planted_degrees, index) -> Optional[float]:
    vector = _second_vector(spec, Pbar, planted_degrees, index)
    if vector is None:
        return None
    return misclustering_rate((vector > 0.0).astype(np.int64), spec.n1, spec.n2)


def estimate_rate(spec: PerturbationSpec, threads: int = 1) -> RateEstimate:
    Pbar = planted_affinity(spec.n1, spec.n2, spec.nu)
    planted_degrees = Pbar.sum(axis=1)
    rates = Parallel(n_jobs=threads, prefer='threads')(
        delayed(_trial)(spec, Pbar, planted_degrees, index) for index in range(spec.trials))
    completed = [r for r in rates if r is not None]
    aborted = len(rates) - len(completed)
    theory = theory_rate(spec.gamma, spec.sigma)
    if aborted:
        logging.warning(f'{aborted} of {spec.trials} trials aborted on a nonpositive degree',
                        'perturbation_lab:estimate_rate')
    if not completed:
        return RateEstimate(math.nan, math.nan, theory, 0, aborted)
    mean_m = math.fsum(completed) / len(completed)
    if mean_m == 0.0:
        logging.warning(f'no misclustering in {len(completed)} trials at n={spec.n} sigma={spec.sigma}',
                        'perturbation_lab:estimate_rate')
        empirical = -math.inf
    else:
        empirical = math.log(mean_m) / spec.n
    return RateEstimate(mean_m, empirical, theory, len(completed), aborted)


def eigen_asymptotics_check(n1: int, gamma: float, nu: float) -> EigenReport:
    n2 = int(round(gamma * n1))
    Pbar = planted_affinity(n1, n2, nu)
    values, vectors = top_eigenpairs(scaled_operator(Pbar, Pbar.sum(axis=1)), 2)
    x2 = vectors[:, 1] * math.sqrt(n1 * gamma ** 3 + n2)
    if x2[n1:].mean() < 0.0:
        x2 = -x2
    predicted = 1.0 - (1.0 + gamma ** 2) * nu / gamma
    expected = np.where(np.arange(n1 + n2) < n1, -gamma ** 1.5, 1.0)
    spread = max(float(np.ptp(x2[:n1])), float(np.ptp(x2[n1:])))
    return EigenReport(float(values[0]), float(values[1]), predicted, abs(float(values[1]) - predicted),
                       float(np.max(np.abs(x2 - expected))), spread)


def _best_cutoff(vector, n1):
    """cutoff between sorted components with the fewest errors, block 2 above."""
    order = np.argsort(vector, kind='stable')
    ordered = vector[order]
    second = (order >= n1).astype(np.int64)
    # errors with the first m sorted points called block 1
    below_second = np.concatenate(([0], np.cumsum(second)))
    above_first = np.concatenate(([0], np.cumsum((1 - second)[::-1])))[::-1]
    m = int(np.argmin(below_second + above_first))
    if m == 0:
        return float(ordered[0])
    if m == ordered.size:
        return float(ordered[-1])
    return 0.5 * float(ordered[m - 1] + ordered[m])


def cutoff_shift(spec: PerturbationSpec, threads: int = 1) -> CutoffShift:
    """second-eigenvector block means and best cutoffs, scaled by sqrt(n), block 2 positive."""
    Pbar = planted_affinity(spec.n1, spec.n2, spec.nu)
    planted_degrees = Pbar.sum(axis=1)
    vectors = Parallel(n_jobs=threads, prefer='threads')(
        delayed(_second_vector)(spec, Pbar, planted_degrees, index) for index in range(spec.trials))
    firsts, seconds, cutoffs = [], [], []
    for vector in vectors:
        if vector is None:
            continue
        vector = vector * math.sqrt(spec.n)
        if vector[spec.n1:].mean() < vector[:spec.n1].mean():
            vector = -vector
        firsts.append(float(vector[:spec.n1].mean()))
        seconds.append(float(vector[spec.n1:].mean()))
        cutoffs.append(_best_cutoff(vector, spec.n1))
    if not cutoffs:
        raise ClusterForestsError('every trial aborted')
    return CutoffShift(float(np.mean(firsts)), float(np.mean(seconds)), float(np.mean(cutoffs)))


def sweep(n1: int, gammas: Sequence[float], sigmas: Sequence[float], nu: float, trials: int, seed: int = 0,
          degrees: str = DEGREES_OBSERVED, threads: int = 1) -> pd.DataFrame:
    """rate estimates over the gamma x sigma grid; every point reuses the same trial streams."""
    rows = []
    for gamma in gammas:
        for sigma in sigmas:
            spec = PerturbationSpec(n1, gamma, nu, sigma, trials, seed, degrees)
            estimate = estimate_rate(spec, threads)
            rows.append((gamma, sigma, nu, spec.n, estimate.completed, estimate.mean_M,
                         estimate.empirical, estimate.theory))
            logging.info(f'gamma={gamma} sigma={sigma} mean_M={estimate.mean_M:.6g}', 'perturbation_lab:sweep')
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
