"""
Mediator screening: Ridge-HOLP outcome-model estimates, marginal
mediator-model least squares, product ranking and the marginal (SIS)
baseline rules used for comparison.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from mediation import config as cfg
from mediation.core_model import CandidateSet, Dataset
from mediation.errors import (ConfigError, ConstantColumnError, IllConditionedError,
                              RankDeficientError, SingularGramError)
from mediation.output import console, Level

MODULE = 'screening'


@dataclass(frozen=True)
class RholpConfig:
    """Ridge constant, candidate count and column scaling for RHOLP."""
    k: float = cfg.RIDGE_K
    d: Optional[int] = None
    standardize: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k >= 0):
            raise ConfigError(f'ridge constant k={self.k} must be >= 0', MODULE)
        if self.d is not None and self.d < 1:
            raise ConfigError(f'candidate count d={self.d} must be >= 1', MODULE)

    def resolve_d(self, n: int, p: int) -> int:
        """Target size, ceil(n / log n) unless set, never above p."""
        return min(self.d or cfg.screen_size(n), p)


@dataclass(frozen=True, eq=False)
class MarginalAlphaFit:
    """Per-mediator least-squares fit of M_j on the exposure."""
    alpha_hat: np.ndarray
    se_alpha: np.ndarray
    sigma_u2: np.ndarray


def gram_matrix(design: np.ndarray) -> np.ndarray:
    """The n x n matrix Z Z'."""
    return design @ design.T


def standardize_columns(design: np.ndarray) -> np.ndarray:
    """Divides each column by its sample standard deviation."""
    scale = design.std(axis=0, ddof=1)
    constant = np.flatnonzero(scale <= np.finfo(float).eps * (1.0 + np.abs(design).max(axis=0)))
    if constant.size:
        raise ConstantColumnError(
            f'cannot standardize constant design column(s) {constant.tolist()}', MODULE)
    return design / scale


def rholp_estimates(dataset: Dataset, k: float = cfg.RIDGE_K, standardize: bool = False,
                    gram: np.ndarray = None) -> np.ndarray:
    """
    Ridge-HOLP coefficients Z'(kI + ZZ')^-1 Y for Z = [M X C].

    :param dataset: validated Dataset.
    :param k: ridge constant; k = 0 gives plain HOLP.
    :param standardize: scale every column of Z to unit sample variance first.
    :param gram: precomputed Z Z' of the unscaled design, reused when given.
    :return: vector of length p + 1 + q ordered as the columns of Z.
    """
    if k < 0:
        raise ConfigError(f'ridge constant k={k} must be >= 0', MODULE)
    design = dataset.design()
    n = dataset.n
    if standardize:
        design = standardize_columns(design)
        gram = None
    if k == 0 and design.shape[1] < n:
        raise SingularGramError(
            f'ZZ\' is singular: {design.shape[1]} columns for {n} observations and k = 0',
            MODULE)

    system = (gram_matrix(design) if gram is None else gram.copy())
    system[np.diag_indices_from(system)] += k
    try:
        factor = linalg.cho_factor(system, lower=True, check_finite=False)
    except linalg.LinAlgError as err:
        raise SingularGramError(f'kI + ZZ\' is not positive definite ({err})', MODULE) from err

    coefficients = design.T @ linalg.cho_solve(factor, dataset.outcome, check_finite=False)
    if not np.all(np.isfinite(coefficients)):
        raise IllConditionedError('RHOLP produced non-finite coefficients', MODULE)
    return coefficients


def nuisance_design(dataset: Dataset, intercept: bool = False) -> np.ndarray:
    """The mediator-model design [X C (1)]; the exposure is column 0."""
    design = dataset.nuisance()
    if intercept:
        design = np.column_stack((design, np.ones(dataset.n)))
    return design


def _normal_factor(design: np.ndarray):
    """Cholesky factor of D'D, refusing rank-deficient designs."""
    n, c = design.shape
    if c >= n:
        raise RankDeficientError(f'{c} design columns for {n} observations', MODULE)
    if np.linalg.matrix_rank(design) < c:
        raise RankDeficientError('mediator-model design [X C] is rank deficient', MODULE)
    return linalg.cho_factor(design.T @ design, lower=True, check_finite=False)


def marginal_alpha_fit(dataset: Dataset, intercept: bool = False) -> MarginalAlphaFit:
    """
    Least-squares alpha_j from regressing each M_j on [X C (1)].

    The residual variance divides by n minus the number of design columns;
    se_alpha_j = sqrt([(D'D)^-1]_00 * sigma_u2_j).
    """
    design = nuisance_design(dataset, intercept)
    n, c = design.shape
    factor = _normal_factor(design)
    coefficients = linalg.cho_solve(factor, design.T @ dataset.mediators, check_finite=False)
    residuals = dataset.mediators - design @ coefficients
    sigma_u2 = np.einsum('ij,ij->j', residuals, residuals) / (n - c)
    inverse_00 = linalg.cho_solve(factor, np.eye(c)[:, 0], check_finite=False)[0]
    return MarginalAlphaFit(
        alpha_hat=coefficients[0].copy(),
        se_alpha=np.sqrt(inverse_00 * sigma_u2),
        sigma_u2=sigma_u2)


def marginal_beta_fit(dataset: Dataset, intercept: bool = False) -> np.ndarray:
    """
    Coefficient of M_j from the marginal outcome regression of Y on
    [M_j X C (1)], for every j, by partialling out [X C (1)].
    """
    design = nuisance_design(dataset, intercept)
    factor = _normal_factor(design)
    mediators = dataset.mediators
    outcome = dataset.outcome
    m_resid = mediators - design @ linalg.cho_solve(factor, design.T @ mediators,
                                                    check_finite=False)
    y_resid = outcome - design @ linalg.cho_solve(factor, design.T @ outcome,
                                                  check_finite=False)
    m_norm2 = np.einsum('ij,ij->j', m_resid, m_resid)
    scale = np.einsum('ij,ij->j', mediators, mediators)
    degenerate = np.flatnonzero(m_norm2 <= cfg.COLLINEAR_TOL * np.maximum(scale, 1e-300))
    if degenerate.size:
        names = ', '.join(dataset.mediator_names[j] for j in degenerate[:5])
        raise RankDeficientError(
            f'mediator(s) {names} collinear with [X C] in the marginal outcome model', MODULE)
    return (m_resid.T @ y_resid) / m_norm2


def select_candidates(alpha_hat: np.ndarray, beta_tilde: np.ndarray, d: int) -> CandidateSet:
    """
    The d indices with the largest |alpha_hat_j * beta_tilde_j|.
    Ties go to the smaller index.
    """
    alpha_hat = np.asarray(alpha_hat, dtype=float)
    beta_tilde = np.asarray(beta_tilde, dtype=float)
    if alpha_hat.shape != beta_tilde.shape or alpha_hat.ndim != 1:
        raise ValueError('alpha_hat and beta_tilde must be vectors of equal length')
    if d < 1:
        raise ValueError(f'candidate count d={d} must be >= 1')
    scores = np.abs(alpha_hat * beta_tilde)
    # Stable sort of the negated scores keeps equal scores in index order.
    order = np.argsort(-scores, kind='stable')[:min(d, scores.shape[0])]
    return CandidateSet(indices=tuple(order), scores=scores[order], d=d)


def baseline_screen(dataset: Dataset, strategy: str, d: int = None,
                    intercept: bool = False) -> CandidateSet:
    """
    SIS-style screening: 'alpha_sis' ranks by |alpha_hat_j|, 'product_sis'
    by |alpha_hat_j * beta_check_j| with marginal outcome coefficients.
    d defaults to ceil(2n / log n).
    """
    from mediation.screeners import screeners_dict

    if strategy not in ('alpha_sis', 'product_sis'):
        raise ConfigError(f'unknown baseline strategy "{strategy}"', MODULE)
    d = d or cfg.baseline_screen_size(dataset.n)
    console(f'Baseline screening {strategy} with d = {d}', level=Level.debug)
    return screeners_dict[strategy](intercept=intercept).screen(dataset, d)
