#
# data.py -- dataset ingestion, standardization, synthetic gaussian mixtures
# and per-feature strength profiles.
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

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.stats import norm

import micro_logging as logging
from base_cluster import FeatureView, InfeasibleClustersError, count_distinct_points, kappa, kmeans
from utils import ClusterForestsError, KAPPA_INFINITY, make_rng, relabel_first_appearance, write_table

NUMERIC = 'numeric'
CATEGORICAL = 'categorical'

# fields that mean "missing" in UCI files; no missing-data support.
MISSING_MARKERS = ('', '?')

G1_LEADING_ZEROS = 3
G1_MIN_EIGENVALUE = 0.01


class MalformedInputError(ClusterForestsError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f'row {row}')
        if column is not None:
            where.append(f'column {column}')
        if where:
            message = f'{message} ({", ".join(where)})'
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyInputError(ClusterForestsError):
    pass


class InvalidSpecError(ClusterForestsError):
    pass


class DegenerateProfileError(ClusterForestsError):
    pass


@dataclass(frozen=True)
class FeatureKind:
    kind: str = NUMERIC
    num_levels: int = 0

    @property
    def is_categorical(self):
        return self.kind == CATEGORICAL


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """
    n x p observations. categorical features hold level codes 0..num_levels-1.
    the value array is read-only once constructed.
    """
    values: np.ndarray
    feature_kinds: Tuple[FeatureKind, ...]
    feature_names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise MalformedInputError(f'data must be 2-D, got shape {values.shape}')
        n, p = values.shape
        if n < 2 or p < 1:
            raise MalformedInputError(f'need n >= 2 and p >= 1, got n={n}, p={p}')
        if not np.all(np.isfinite(values)):
            bad_row, bad_col = np.argwhere(~np.isfinite(values))[0]
            raise MalformedInputError('non-finite value', row=int(bad_row), column=int(bad_col))
        kinds = tuple(self.feature_kinds)
        if len(kinds) != p:
            raise MalformedInputError(f'{len(kinds)} feature kinds for {p} features')
        for j, fk in enumerate(kinds):
            if fk.is_categorical:
                column = values[:, j]
                if np.any(column != np.round(column)) or column.min() < 0 or column.max() >= fk.num_levels:
                    raise MalformedInputError('categorical codes out of range', column=j)
        names = None if self.feature_names is None else tuple(self.feature_names)
        if names is not None and len(names) != p:
            raise MalformedInputError(f'{len(names)} feature names for {p} features')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'feature_kinds', kinds)
        object.__setattr__(self, 'feature_names', names)

    @classmethod
    def from_array(cls, values, feature_names=None):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        return cls(values, tuple(FeatureKind() for _ in range(values.shape[1])), feature_names)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    @property
    def numeric_mask(self):
        return np.array([not fk.is_categorical for fk in self.feature_kinds], dtype=bool)

    def view(self, columns) -> np.ndarray:
        return self.values[:, np.asarray(columns, dtype=np.int64)]

    def take_rows(self, rows):
        return DataMatrix(self.values[np.asarray(rows, dtype=np.int64)], self.feature_kinds, self.feature_names)


@dataclass(frozen=True, eq=False)
class LabelVector:
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if self.num_classes < 1:
            raise ClusterForestsError(f'num_classes must be >= 1, got {self.num_classes}')
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ClusterForestsError(f'labels outside 0..{self.num_classes - 1}')
        labels.setflags(write=False)
        object.__setattr__(self, 'labels', labels)

    @classmethod
    def from_labels(cls, labels):
        """code arbitrary labels 0..K-1 in order of first appearance."""
        codes = relabel_first_appearance(np.asarray(labels).reshape(-1))
        return cls(codes, int(codes.max()) + 1 if codes.size else 1)

    def __len__(self):
        return self.labels.size


@dataclass(frozen=True, eq=False)
class GaussianMixtureSpec:
    """two-component mixture: with probability pi N(mu, sigma) (label 1), else N(-mu, sigma)."""
    mu: np.ndarray
    sigma: np.ndarray
    pi: float = 0.5

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64).reshape(-1)
        sigma = np.array(self.sigma, dtype=np.float64)
        if sigma.shape != (mu.size, mu.size):
            raise InvalidSpecError(f'sigma shape {sigma.shape} does not match mu length {mu.size}')
        if not 0.0 < self.pi < 1.0:
            raise InvalidSpecError(f'pi must be in (0, 1), got {self.pi}')
        object.__setattr__(self, 'mu', mu)
        object.__setattr__(self, 'sigma', sigma)

    @property
    def p(self):
        return self.mu.size

    def cholesky(self):
        if not np.allclose(self.sigma, self.sigma.T, rtol=0.0, atol=1e-12):
            raise InvalidSpecError('sigma is not symmetric')
        try:
            return np.linalg.cholesky(self.sigma)
        except np.linalg.LinAlgError as exc:
            raise InvalidSpecError(f'sigma is not positive definite: {exc}') from exc


def _parse_float(text):
    try:
        return float(text)
    except ValueError:
        return None


def _looks_like_header(frame):
    if len(frame) < 2:
        return False
    first = frame.iloc[0]
    if any(_parse_float(v) is not None for v in first):
        return False
    names = [str(v).strip() for v in first]
    if len(set(names)) != len(names):
        return False
    # no field of the first row may reappear below it in the same column
    for col in frame.columns:
        if (frame[col].iloc[1:].str.strip() == str(first[col]).strip()).any():
            return False
    return True


def _decode(path):
    raw = Path(path).read_bytes()
    try:
        return raw.decode('utf-8').lstrip('\ufeff')
    except UnicodeDecodeError as exc:
        line_start = raw.rfind(b'\n', 0, exc.start) + 1
        row = raw.count(b'\n', 0, exc.start) + 1
        column = raw.count(b',', line_start, exc.start)
        raise MalformedInputError(f'{path} is not valid UTF-8', row=row, column=column) from exc


def _resolve_column(column_id, names):
    if isinstance(column_id, (int, np.integer)):
        if not 0 <= column_id < len(names):
            raise MalformedInputError(f'column index {column_id} out of range')
        return int(column_id)
    if column_id in names:
        return names.index(column_id)
    if str(column_id).lstrip('-').isdigit():
        return _resolve_column(int(column_id), names)
    raise MalformedInputError(f'no column named {column_id!r}')


def load_csv(path,
             label_column: Union[int, str, None] = None,
             kinds: Optional[Mapping[Union[int, str], str]] = None,
             header: Optional[bool] = None) -> Tuple[DataMatrix, Optional[LabelVector]]:
    """
    load a comma separated UTF-8 file. header=None guesses: the first row is a header when
    none of its fields is a number, its fields are distinct, and none of them shows up
    again further down its column.
    kinds overrides the per-column numeric/categorical guess, keyed by index or name.
    """
    text = _decode(path)
    try:
        frame = pd.read_csv(io.StringIO(text), header=None, dtype=str, keep_default_na=False,
                            na_filter=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError as exc:
        raise EmptyInputError(f'{path} is empty') from exc
    except (pd.errors.ParserError, ValueError) as exc:
        raise MalformedInputError(f'cannot parse {path}: {exc}') from exc

    if header is None:
        header = _looks_like_header(frame)
    first_data_line = 1
    if header:
        names = [str(v).strip() for v in frame.iloc[0]]
        frame = frame.iloc[1:].reset_index(drop=True)
        first_data_line = 2
    else:
        names = [str(i) for i in range(frame.shape[1])]
    if frame.shape[0] == 0:
        raise EmptyInputError(f'{path} has no data rows')

    # pandas pads short rows with NaN even with na_filter off.
    short = frame.isna()
    if short.to_numpy().any():
        row, col = np.argwhere(short.to_numpy())[0]
        raise MalformedInputError('row has too few fields', row=int(row) + first_data_line, column=int(col))
    frame = frame.apply(lambda s: s.str.strip())
    for marker in MISSING_MARKERS:
        hits = (frame == marker).to_numpy()
        if hits.any():
            row, col = np.argwhere(hits)[0]
            raise MalformedInputError(f'missing value {marker!r} not supported',
                                      row=int(row) + first_data_line, column=names[col])

    label_index = None if label_column is None else _resolve_column(label_column, names)
    overrides = {}
    for key, kind in (kinds or {}).items():
        if kind not in (NUMERIC, CATEGORICAL):
            raise MalformedInputError(f'unknown feature kind {kind!r}')
        overrides[_resolve_column(key, names)] = kind

    columns = []
    feature_kinds = []
    feature_names = []
    for j in range(frame.shape[1]):
        if j == label_index:
            continue
        raw = frame.iloc[:, j]
        parsed = [_parse_float(v) for v in raw]
        numeric = all(v is not None for v in parsed)
        kind = overrides.get(j, NUMERIC if numeric else CATEGORICAL)
        if kind == NUMERIC:
            if not numeric:
                row = next(i for i, v in enumerate(parsed) if v is None)
                raise MalformedInputError(f'not a number: {raw.iloc[row]!r}',
                                          row=row + first_data_line, column=names[j])
            columns.append(np.array(parsed, dtype=np.float64))
            feature_kinds.append(FeatureKind(NUMERIC))
        else:
            codes, levels = pd.factorize(raw, sort=False)
            columns.append(codes.astype(np.float64))
            feature_kinds.append(FeatureKind(CATEGORICAL, len(levels)))
        feature_names.append(names[j])
    if not columns:
        raise EmptyInputError(f'{path} has no feature columns')

    data = DataMatrix(np.column_stack(columns), tuple(feature_kinds), tuple(feature_names))
    labels = None
    if label_index is not None:
        labels = LabelVector.from_labels(frame.iloc[:, label_index].to_numpy())
    logging.info(f'loaded {path}: n={data.n}, p={data.p}'
                 + ('' if labels is None else f', {labels.num_classes} classes'), 'data:load_csv')
    return data, labels


def standardize(data: DataMatrix) -> DataMatrix:
    """
    numeric columns to zero mean and unit population standard deviation (divide by n).
    constant columns become all zero; categorical columns keep their codes.
    """
    values = np.array(data.values)
    for j in np.flatnonzero(data.numeric_mask):
        column = values[:, j]
        if np.ptp(column) == 0.0:
            values[:, j] = 0.0
            continue
        centered = column - column.mean()
        values[:, j] = centered / np.sqrt(np.mean(centered ** 2))
    return DataMatrix(values, data.feature_kinds, data.feature_names)


def sample_gaussian_mixture(spec: GaussianMixtureSpec, n: int, seed) -> Tuple[DataMatrix, LabelVector]:
    # a DataMatrix holds at least two rows
    if n < 2:
        raise InvalidSpecError(f'n must be >= 2, got {n}')
    chol = spec.cholesky()
    rng = make_rng(seed)
    delta = rng.random(n) < spec.pi
    noise = rng.standard_normal((n, spec.p)) @ chol.T
    values = noise + np.where(delta[:, None], spec.mu, -spec.mu)
    return DataMatrix.from_array(values), LabelVector(delta.astype(np.int64), 2)


def bayes_accuracy(spec: GaussianMixtureSpec) -> float:
    """accuracy of the optimal (linear) rule for the two-component mixture."""
    m = float(spec.mu @ np.linalg.solve(spec.sigma, spec.mu))
    if m == 0.0:
        return max(spec.pi, 1.0 - spec.pi)
    cut = np.log((1.0 - spec.pi) / spec.pi)
    scale = 2.0 * np.sqrt(m)
    return float(spec.pi * norm.cdf((2.0 * m - cut) / scale)
                 + (1.0 - spec.pi) * norm.cdf((2.0 * m + cut) / scale))


def preset_g1(seed=0) -> GaussianMixtureSpec:
    """three leading zero coordinates then 1..100, correlated covariance."""
    mu = np.concatenate([np.zeros(G1_LEADING_ZEROS), np.arange(1, 101, dtype=np.float64)])
    p = mu.size
    rng = make_rng(seed)
    upper = np.triu(rng.uniform(0.0, 0.5, size=(p, p)), k=1)
    sigma = upper + upper.T + np.eye(p)
    smallest = np.linalg.eigvalsh(sigma)[0]
    shift = max(0.0, G1_MIN_EIGENVALUE - smallest)
    sigma = sigma + shift * np.eye(p)
    return GaussianMixtureSpec(mu, sigma, 0.5)


def preset_g2(seed=0) -> GaussianMixtureSpec:
    """100 noise coordinates then 20 drawn uniformly from [0, 1]; identity covariance."""
    rng = make_rng(seed)
    mu = np.concatenate([np.zeros(100), rng.uniform(0.0, 1.0, size=20)])
    return GaussianMixtureSpec(mu, np.eye(mu.size), 0.5)


def preset_g3(seed=0) -> GaussianMixtureSpec:
    """1000 noise coordinates then 1..20; identity covariance."""
    mu = np.concatenate([np.zeros(1000), np.arange(1, 21, dtype=np.float64)])
    return GaussianMixtureSpec(mu, np.eye(mu.size), 0.5)


PRESETS = {
    'g1': preset_g1,
    'g2': preset_g2,
    'g3': preset_g3,
}


def feature_profile(data: DataMatrix, k: int, seed) -> np.ndarray:
    """
    strength of each feature = kappa of a k-means run on that feature alone.
    categorical features with fewer than k levels borrow a strength drawn at random
    from the other features' finite strengths.
    """
    if k < 2:
        raise InvalidSpecError(f'k must be >= 2, got {k}')
    strengths = np.full(data.p, np.nan)
    borrowers = []
    for j, fk in enumerate(data.feature_kinds):
        if fk.is_categorical and fk.num_levels < k:
            borrowers.append(j)
            continue
        view = FeatureView(data, (j,))
        if count_distinct_points(view) < k:
            strengths[j] = KAPPA_INFINITY
            continue
        try:
            part = kmeans(view, k, make_rng(seed, j))
        except InfeasibleClustersError:
            strengths[j] = KAPPA_INFINITY
            continue
        strengths[j] = kappa(view, part)
    if borrowers:
        donors = strengths[np.isfinite(strengths)]
        if donors.size == 0:
            raise DegenerateProfileError('no feature has a computable strength to borrow from')
        rng = make_rng(seed, data.p)
        strengths[borrowers] = rng.choice(donors, size=len(borrowers), replace=True)
        if logging.should_log(logging.DEBUG):
            logging.debug(f'{len(borrowers)} categorical features borrowed strengths', 'data:feature_profile')
    return strengths


def write_profile_csv(path, strengths: Sequence[float], metadata=None):
    frame = pd.DataFrame({'feature_index': np.arange(len(strengths)),
                          'strength': np.asarray(strengths, dtype=np.float64)})
    write_table(path, frame, metadata)
