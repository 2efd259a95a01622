"""
FDR control for the composite null alpha_j * beta_j = 0.

The null is the union of H00 (alpha = beta = 0), H01 (alpha = 0, beta != 0)
and H10 (alpha != 0, beta = 0). With p_max = max(p_alpha, p_beta), the
estimated FDR at cutoff t is

    FDR(t) = (pi01 t + pi10 t + pi00 t^2) / (max(1, R(t)) / |S|),

where R(t) counts candidates with p_max <= t. The proportions come from
counting p-values above a tuning constant lambda:

    pi00 = #{p_alpha > lambda, p_beta > lambda} / ((1 - lambda)^2 |S|)
    pi0+ = #{p_alpha > lambda} / ((1 - lambda) |S|),  pi01 = pi0+ - pi00
    pi+0 = #{p_beta > lambda} / ((1 - lambda) |S|),   pi10 = pi+0 - pi00
"""
import math
from dataclasses import dataclass
from typing import FrozenSet, Tuple

import numpy as np

from mediation import config as cfg
from mediation.core_model import FdrModel
from mediation.errors import ConfigError, DataError

MODULE = 'composite_fdr'

Proportions = Tuple[float, float, float]


@dataclass(frozen=True, eq=False)
class PairedPValues:
    """(index, p_alpha, p_beta, p_max) for every candidate."""
    indices: Tuple[int, ...]
    p_alpha: np.ndarray
    p_beta: np.ndarray

    def __post_init__(self):
        p_alpha = np.array(self.p_alpha, dtype=float)
        p_beta = np.array(self.p_beta, dtype=float)
        object.__setattr__(self, 'indices', tuple(int(j) for j in self.indices))
        if not (p_alpha.shape == p_beta.shape == (len(self.indices),)):
            raise DataError('p-value vectors and indices differ in length', MODULE)
        if len(set(self.indices)) != len(self.indices):
            raise DataError('candidate indices are not distinct', MODULE)
        for values in (p_alpha, p_beta):
            if np.any(~(values >= 0) | ~(values <= 1)):
                raise DataError('p-values must lie in [0, 1]', MODULE)
            values.setflags(write=False)
        object.__setattr__(self, 'p_alpha', p_alpha)
        object.__setattr__(self, 'p_beta', p_beta)

    @classmethod
    def from_results(cls, results) -> 'PairedPValues':
        """Builds the pairs from a TestResults container."""
        return cls(tuple(results.indices()), results.p_alpha(), results.p_beta())

    @property
    def p_max(self) -> np.ndarray:
        return np.maximum(self.p_alpha, self.p_beta)

    @property
    def records(self):
        return list(zip(self.indices, self.p_alpha, self.p_beta, self.p_max))

    def __len__(self):
        return len(self.indices)


def _clamp(pi00: float, pi01: float, pi10: float) -> Proportions:
    # Floor at 0, cap at 1, then rescale a sum above 1.
    values = np.clip([pi00, pi01, pi10], 0.0, 1.0)
    total = values.sum()
    if total > 1.0:
        values = values / total
    return tuple(float(v) for v in values)


def estimate_null_proportions(pairs: PairedPValues, lam: float = cfg.NULL_LAMBDA) -> Proportions:
    """
    Estimate (pi00, pi01, pi10). Differences are formed from the raw counting
    estimates and the triple is clamped afterwards.
    """
    if len(pairs) == 0:
        raise DataError('cannot estimate null proportions from an empty set', MODULE)
    if not 0.0 < lam < 1.0:
        raise ConfigError(f'lambda={lam} outside (0, 1)', MODULE)
    size = len(pairs)
    alpha_tail = pairs.p_alpha > lam
    beta_tail = pairs.p_beta > lam
    pi00 = np.sum(alpha_tail & beta_tail) / ((1.0 - lam) ** 2 * size)
    pi0_plus = np.sum(alpha_tail) / ((1.0 - lam) * size)
    pi_plus0 = np.sum(beta_tail) / ((1.0 - lam) * size)
    return _clamp(pi00, pi0_plus - pi00, pi_plus0 - pi00)


def rejections(pairs: PairedPValues, t: float) -> int:
    """R(t), the number of candidates with p_max <= t."""
    return int(np.sum(pairs.p_max <= t))


def fdr_hat(pairs: PairedPValues, proportions: Proportions, t: float) -> float:
    """The estimated FDR at cutoff t."""
    if not 0.0 <= t <= 1.0:
        raise ConfigError(f'cutoff t={t} outside [0, 1]', MODULE)
    pi00, pi01, pi10 = proportions
    numerator = pi01 * t + pi10 * t + pi00 * t * t
    return numerator / (max(1, rejections(pairs, t)) / len(pairs))


def within_level(value: float, alpha: float) -> bool:
    """value <= alpha up to the rounding of the FDR formula."""
    return value <= alpha * (1.0 + cfg.FDR_SLACK)


def _largest_root(linear: float, quadratic: float, bound: float) -> float:
    """Largest t >= 0 with linear * t + quadratic * t^2 <= bound."""
    if linear <= 0 and quadratic <= 0:
        return math.inf
    return 2.0 * bound / (linear + math.sqrt(linear * linear + 4.0 * quadratic * bound))


def find_threshold(pairs: PairedPValues, proportions: Proportions,
                   alpha: float = cfg.ALPHA_LEVEL) -> float:
    """
    sup{t in [0, 1] : FDR(t) <= alpha}.

    R(t) only jumps at observed p_max values and the numerator increases in t,
    so FDR(t) increases between consecutive knots and the condition there is
    a quadratic inequality, solved exactly.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f'alpha={alpha} outside (0, 1)', MODULE)
    if len(pairs) == 0:
        raise DataError('no candidates to threshold', MODULE)
    pi00, pi01, pi10 = proportions
    size = len(pairs)
    p_max = np.sort(pairs.p_max)
    knots = np.unique(np.concatenate(([0.0], p_max, [1.0])))

    best = 0.0
    for left, right in zip(knots[:-1], knots[1:]):
        if not within_level(fdr_hat(pairs, proportions, left), alpha):
            continue
        count = int(np.searchsorted(p_max, left, side='right'))
        bound = alpha * max(1, count) / size
        root = _largest_root(pi01 + pi10, pi00, bound)
        best = max(best, min(max(root, left), right))
    if within_level(fdr_hat(pairs, proportions, 1.0), alpha):
        return 1.0

    # The analytic root may sit a few rounding steps above the level.
    for _ in range(16):
        if best == 0 or within_level(fdr_hat(pairs, proportions, best), alpha):
            break
        best = float(np.nextafter(best, 0.0))
    return float(best)


def discover(pairs: PairedPValues, t_hat: float) -> FrozenSet[int]:
    """Indices of the candidates with p_max <= t_hat."""
    if not 0.0 <= t_hat <= 1.0:
        raise ConfigError(f't_hat={t_hat} outside [0, 1]', MODULE)
    keep = pairs.p_max <= t_hat
    return frozenset(j for j, hit in zip(pairs.indices, keep) if hit)


def fit_fdr_model(pairs: PairedPValues, lam: float = cfg.NULL_LAMBDA,
                  alpha: float = cfg.ALPHA_LEVEL) -> FdrModel:
    """Proportions, then the threshold, packed as an FdrModel."""
    proportions = estimate_null_proportions(pairs, lam)
    t_hat = find_threshold(pairs, proportions, alpha)
    return FdrModel(*proportions, lam=lam, t_hat=t_hat, alpha_level=alpha)

