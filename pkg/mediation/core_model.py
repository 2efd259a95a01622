"""
Shared domain types of the mediation package and their validation.

A Dataset holds the exposure X, the n x p mediator matrix M, the outcome Y,
optional covariates C and one identifier per mediator. All types are
immutable once built: arrays are stored read-only, so a validated object
can be shared between worker threads and processes.
"""
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from mediation import config as cfg
from mediation.errors import (DimensionMismatchError, DuplicateNameError,
                              NonFiniteError, TooFewSamplesError, ConfigError)

MODULE = 'core_model'


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def synthetic_names(p: int) -> Tuple[str, ...]:
    """Names for mediators without a header: M0001, M0002, ..."""
    width = max(4, len(str(p)))
    return tuple(f'M{j:0{width}d}' for j in range(1, p + 1))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Exposure, mediators (one column per mediator), outcome, covariates."""
    exposure: np.ndarray
    mediators: np.ndarray
    outcome: np.ndarray
    covariates: Optional[np.ndarray] = None
    mediator_names: Tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.outcome.shape[0]

    @property
    def p(self) -> int:
        return self.mediators.shape[1]

    @property
    def q(self) -> int:
        return 0 if self.covariates is None else self.covariates.shape[1]

    def nuisance(self) -> np.ndarray:
        """The n x (1 + q) matrix [X C]."""
        if self.covariates is None:
            return self.exposure[:, None]
        return np.column_stack((self.exposure, self.covariates))

    def design(self) -> np.ndarray:
        """The n x (p + 1 + q) matrix Z = [M X C]."""
        return np.column_stack((self.mediators, self.nuisance()))

    def centered(self) -> 'Dataset':
        """Copy with every column (and the outcome) centered at zero."""
        covariates = None
        if self.covariates is not None:
            covariates = self.covariates - self.covariates.mean(axis=0)
        return validate_dataset(Dataset(
            exposure=self.exposure - self.exposure.mean(),
            mediators=self.mediators - self.mediators.mean(axis=0),
            outcome=self.outcome - self.outcome.mean(),
            covariates=covariates,
            mediator_names=self.mediator_names))

    def take_rows(self, rows: Sequence[int]) -> 'Dataset':
        """Copy holding only the observations in *rows*, in that order."""
        rows = np.asarray(rows, dtype=int)
        covariates = None if self.covariates is None else self.covariates[rows]
        return validate_dataset(Dataset(
            exposure=self.exposure[rows],
            mediators=self.mediators[rows],
            outcome=self.outcome[rows],
            covariates=covariates,
            mediator_names=self.mediator_names))


def _as_vector(values, what: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.ndim == 2 and array.shape[1] == 1:
        array = array[:, 0]
    if array.ndim != 1:
        raise DimensionMismatchError(f'{what} must be a vector, got shape {array.shape}', MODULE)
    return array


def _as_matrix(values, what: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.ndim == 1:
        array = array[:, None]
    if array.ndim != 2:
        raise DimensionMismatchError(f'{what} must be a matrix, got shape {array.shape}', MODULE)
    return array


def _check_finite(array: np.ndarray, what: str) -> None:
    bad = ~np.isfinite(array)
    if bad.any():
        position = np.argwhere(bad)[0]
        row = int(position[0])
        column = int(position[1]) if position.size > 1 else 0
        raise NonFiniteError(
            f'non-finite value in {what} at (row {row}, column {column})',
            row, column, MODULE)


def validate_dataset(raw: Dataset) -> Dataset:
    """
    Check and normalize a candidate Dataset.

    :param raw: any object with the Dataset attributes; array-likes are accepted.
    :return: a read-only Dataset with float arrays, mediators column-major.
    """
    exposure = _as_vector(raw.exposure, 'exposure')
    outcome = _as_vector(raw.outcome, 'outcome')
    mediators = _as_matrix(raw.mediators, 'mediators')
    covariates = None
    if raw.covariates is not None:
        covariates = _as_matrix(raw.covariates, 'covariates')
        if covariates.shape[1] == 0:
            covariates = None

    n = outcome.shape[0]
    counts = {'exposure': exposure.shape[0], 'mediators': mediators.shape[0]}
    if covariates is not None:
        counts['covariates'] = covariates.shape[0]
    for what, rows in counts.items():
        if rows != n:
            raise DimensionMismatchError(
                f'{what} has {rows} rows but outcome has {n}', MODULE)
    if n < cfg.MIN_SAMPLES:
        raise TooFewSamplesError(
            f'need at least {cfg.MIN_SAMPLES} observations, got {n}', MODULE)
    if mediators.shape[1] < 1:
        raise DimensionMismatchError('no mediator columns', MODULE)

    _check_finite(exposure, 'exposure')
    _check_finite(mediators, 'mediators')
    _check_finite(outcome, 'outcome')
    if covariates is not None:
        _check_finite(covariates, 'covariates')

    names = tuple(str(name) for name in raw.mediator_names) or synthetic_names(mediators.shape[1])
    if len(names) != mediators.shape[1]:
        raise DimensionMismatchError(
            f'{len(names)} mediator names for {mediators.shape[1]} mediator columns', MODULE)
    if len(set(names)) != len(names):
        dupes = sorted(name for name, count in Counter(names).items() if count > 1)
        raise DuplicateNameError(f'duplicate mediator names: {", ".join(dupes)}', MODULE)

    # Inference reads one mediator column at a time.
    mediators = np.asfortranarray(mediators)
    return Dataset(
        exposure=_frozen(exposure.copy()),
        mediators=_frozen(mediators.copy(order='F')),
        outcome=_frozen(outcome.copy()),
        covariates=None if covariates is None else _frozen(covariates.copy()),
        mediator_names=names)


def make_dataset(exposure, mediators, outcome, covariates=None,
                 mediator_names: Sequence[str] = ()) -> Dataset:
    """Builds and validates a Dataset from array-likes."""
    return validate_dataset(Dataset(exposure, mediators, outcome, covariates,
                                    tuple(mediator_names)))


@dataclass(frozen=True, eq=False)
class ModelTruth:
    """True coefficients of a simulated dataset."""
    alpha: np.ndarray
    beta: np.ndarray
    gamma: float
    active_set: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'alpha', np.array(self.alpha, dtype=float))
        object.__setattr__(self, 'beta', np.array(self.beta, dtype=float))
        if self.alpha.shape != self.beta.shape:
            raise DimensionMismatchError('alpha and beta lengths differ', MODULE)
        active = np.flatnonzero((self.alpha != 0) & (self.beta != 0))
        object.__setattr__(self, 'active_set', tuple(int(j) for j in active))
        _frozen(self.alpha)
        _frozen(self.beta)

    @property
    def s11(self) -> int:
        return len(self.active_set)


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Screened mediators in descending score order."""
    indices: Tuple[int, ...]
    scores: np.ndarray
    d: int

    def __post_init__(self):
        object.__setattr__(self, 'indices', tuple(int(j) for j in self.indices))
        scores = np.asarray(self.scores, dtype=float)
        object.__setattr__(self, 'scores', _frozen(scores))
        if len(self.indices) != scores.shape[0]:
            raise DimensionMismatchError('indices and scores lengths differ', MODULE)
        if len(set(self.indices)) != len(self.indices):
            raise ValueError('candidate indices are not distinct')
        if np.any(np.diff(scores) > 0):
            raise ValueError('candidate scores must be non-increasing')
        if len(self.indices) > self.d:
            raise ValueError(f'{len(self.indices)} candidates exceed target size {self.d}')

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, j):
        return j in self.indices


@dataclass(frozen=True)
class TestRecord:
    """Marginal alpha test and AO beta test of one candidate."""
    index: int
    alpha_hat: float
    se_alpha: float
    p_alpha: float
    beta_hat: float
    se_beta: float
    p_beta: float
    p_max: float = field(init=False)

    __test__ = False

    def __post_init__(self):
        for name in ('p_alpha', 'p_beta'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f'{name}={value} outside [0, 1]')
        for name in ('se_alpha', 'se_beta'):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f'{name}={value} must be finite and non-negative')
        object.__setattr__(self, 'p_max', max(self.p_alpha, self.p_beta))


@dataclass(frozen=True)
class FdrModel:
    """Composite-null proportions, tuning and the selected cutoff."""
    pi00: float
    pi01: float
    pi10: float
    lam: float
    t_hat: float
    alpha_level: float

    def __post_init__(self):
        for name in ('pi00', 'pi01', 'pi10', 't_hat'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f'{name}={value} outside [0, 1]', MODULE)
        if self.pi00 + self.pi01 + self.pi10 > 1.0 + cfg.PROPORTION_SLACK:
            raise ConfigError('null proportions sum above 1', MODULE)
        if not 0.0 < self.lam < 1.0:
            raise ConfigError(f'lambda={self.lam} outside (0, 1)', MODULE)
        if not 0.0 < self.alpha_level < 1.0:
            raise ConfigError(f'alpha_level={self.alpha_level} outside (0, 1)', MODULE)

    @property
    def proportions(self) -> Tuple[float, float, float]:
        return self.pi00, self.pi01, self.pi10
