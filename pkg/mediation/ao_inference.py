"""
Inference for the outcome-model coefficients beta_j by approximate
orthogonalization.

The low-dimensional nuisance columns [X C (1)] are projected out exactly:
M~ and Y~ are the residuals of M and Y on them. For a candidate j the
projection direction is

    v_j = delta (W_-j W_-j' + delta I)^-1 M~_j,

where W_-j is M~ without the column M~_j. Because
W_-j W_-j' = M~M~' - M~_j M~_j', every v_j follows from one Cholesky factor
of G = M~M~' + delta I by a rank-one downdate:

    (G - m m')^-1 m = G^-1 m / (1 - m' G^-1 m).

The test statistic is beta_hat_j = (v_j' M_j)^-1 v_j' Y with standard error
sqrt((v_j' M_j)^-2 (v_j' v_j) sigma_eps2). v_j is orthogonal to [X C (1)],
so the direct effect never enters the bias.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import linalg, special

from mediation import config as cfg
from mediation.core_model import CandidateSet, Dataset
from mediation.errors import (ConfigError, DegenerateProjectionError, FactorizationError,
                              RankDeficientError)
from mediation.output import console, Level
from mediation.screening import (gram_matrix, nuisance_design, rholp_estimates,
                                 select_candidates)

MODULE = 'ao_inference'

SIGMA_EPS_METHODS = ('refitted_cv', 'refit_on_candidates')


@dataclass(frozen=True)
class AoConfig:
    """Projection regularization and the residual-variance estimator."""
    delta: float = cfg.AO_DELTA
    sigma_eps_method: str = 'refitted_cv'

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise ConfigError(f'delta={self.delta} must be > 0', MODULE)
        if self.sigma_eps_method not in SIGMA_EPS_METHODS:
            raise ConfigError(f'unknown sigma_eps method "{self.sigma_eps_method}"', MODULE)


@dataclass(frozen=True, eq=False)
class AoContext:
    """One factorization of ZZ' + delta I shared by all candidates."""
    design: np.ndarray
    outcome: np.ndarray
    gram_plus: np.ndarray
    factor: tuple
    delta: float
    sigma_eps2: float

    @classmethod
    def from_design(cls, design, outcome, delta=cfg.AO_DELTA, sigma_eps2=1.0, gram=None):
        """Factorizes ZZ' + delta I for an arbitrary design matrix Z."""
        design = np.array(design, dtype=float)
        if design.ndim == 1:
            design = design[:, None]
        gram_plus = gram_matrix(design) if gram is None else gram.copy()
        gram_plus[np.diag_indices_from(gram_plus)] += delta
        try:
            factor = linalg.cho_factor(gram_plus, lower=True, check_finite=False)
        except linalg.LinAlgError as err:
            raise FactorizationError(
                f'ZZ\' + delta I is not positive definite; try a larger delta ({err})',
                MODULE) from err
        for array in (design, gram_plus):
            array.setflags(write=False)
        return cls(design=design, outcome=np.asarray(outcome, dtype=float),
                   gram_plus=gram_plus, factor=factor, delta=float(delta),
                   sigma_eps2=float(sigma_eps2))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """(ZZ' + delta I)^-1 rhs."""
        return linalg.cho_solve(self.factor, rhs, check_finite=False)


def estimate_sigma_eps2(dataset: Dataset, candidates: CandidateSet,
                        intercept: bool = False) -> float:
    """
    Residual mean square of the least-squares refit of Y on
    [M_S X C (1)]. Collinear mediator columns are dropped and reported.
    """
    parts = [dataset.mediators[:, list(candidates.indices)], dataset.nuisance()]
    labels = [dataset.mediator_names[j] for j in candidates.indices]
    labels += ['X'] + [f'C{i + 1}' for i in range(dataset.q)]
    if intercept:
        parts.append(np.ones((dataset.n, 1)))
        labels.append('(intercept)')
    design = np.column_stack(parts)
    n, c = design.shape
    if c >= n:
        raise RankDeficientError(
            f'refit needs fewer than {n} columns, got {c}', MODULE)

    _, r_factor, pivots = linalg.qr(design, mode='economic', pivoting=True)
    diagonal = np.abs(np.diag(r_factor))
    rank = int(np.sum(diagonal > cfg.COLLINEAR_TOL * diagonal[0])) if diagonal[0] > 0 else 0
    if rank < c:
        dropped = sorted(labels[i] for i in pivots[rank:])
        console(f'sigma_eps refit dropped collinear column(s): {", ".join(dropped)}',
                level=Level.warning)
    kept = design[:, np.sort(pivots[:rank])]
    coefficients, *_ = np.linalg.lstsq(kept, dataset.outcome, rcond=None)
    residuals = dataset.outcome - kept @ coefficients
    return float(residuals @ residuals / (n - rank))


def split_rows(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """The fixed random split of range(n) into two halves, each sorted."""
    order = np.random.default_rng(cfg.RCV_SEED).permutation(n)
    return np.sort(order[:n // 2]), np.sort(order[n // 2:])


def refitted_cv_sigma_eps2(dataset: Dataset, intercept: bool = False,
                           k: float = cfg.RIDGE_K) -> float:
    """
    Refitted cross-validation: RHOLP ranks the mediators by |beta_tilde_j|
    on one half of the rows, the candidate refit of the other half gives a
    residual mean square, the halves swap and the two estimates are
    averaged. The refit half never took part in the selection.

    :raises RankDeficientError: when a half cannot hold one mediator
        next to [X C (1)] with a residual degree of freedom left.
    """
    halves = split_rows(dataset.n)
    nuisance = 1 + dataset.q + int(intercept)
    room = min(half.size for half in halves) - nuisance - 1
    if room < 1:
        raise RankDeficientError(
            f'{dataset.n} observations are too few to split for the sigma_eps refit', MODULE)

    estimates = []
    for screen_rows, fit_rows in (halves, halves[::-1]):
        screen_part = dataset.take_rows(screen_rows)
        if intercept:
            screen_part = screen_part.centered()
        beta_tilde = rholp_estimates(screen_part, k)[:dataset.p]
        d = min(cfg.screen_size(screen_rows.size), dataset.p, room)
        chosen = select_candidates(np.ones(dataset.p), beta_tilde, d)
        estimates.append(estimate_sigma_eps2(dataset.take_rows(fit_rows), chosen, intercept))
    return float(np.mean(estimates))


def column_basis(columns: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the span of *columns*, collinear ones dropped."""
    q_factor, r_factor, _ = linalg.qr(columns, mode='economic', pivoting=True)
    diagonal = np.abs(np.diag(r_factor))
    rank = int(np.sum(diagonal > cfg.COLLINEAR_TOL * diagonal[0])) if diagonal[0] > 0 else 0
    return q_factor[:, :rank]


def residualize(basis: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Residuals of *values* (vector or columns) on an orthonormal *basis*."""
    return values - basis @ (basis.T @ values)


def build_ao_context(dataset: Dataset, candidates: CandidateSet, config: AoConfig = None,
                     intercept: bool = False, gram: np.ndarray = None) -> AoContext:
    """
    Factorizes M~M~' + delta I, with M~ all p mediators after [X C (1)] is
    projected out, and estimates sigma_eps2 by the configured method.

    :param gram: precomputed ZZ' of Z = [M X C], reused when given.
    """
    config = config or AoConfig()
    sigma_eps2 = None
    if config.sigma_eps_method == 'refitted_cv':
        try:
            sigma_eps2 = refitted_cv_sigma_eps2(dataset, intercept)
        except RankDeficientError as err:
            console(f'{err}; sigma_eps2 from the candidate refit instead', level=Level.warning)
    if sigma_eps2 is None:
        sigma_eps2 = estimate_sigma_eps2(dataset, candidates, intercept)

    basis = column_basis(nuisance_design(dataset, intercept))
    mediators = residualize(basis, dataset.mediators)
    residual_gram = None
    if gram is not None:
        # MM' = ZZ' - NN', then both sides projected off the nuisance span.
        columns = dataset.nuisance()
        residual_gram = residualize(basis, gram - columns @ columns.T)
        residual_gram = residualize(basis, residual_gram.T)
    return AoContext.from_design(mediators, residualize(basis, dataset.outcome),
                                 config.delta, sigma_eps2, gram=residual_gram)


def ao_projections(context: AoContext, indices: Sequence[int]) -> np.ndarray:
    """Projection directions of several columns, one per output column."""
    indices = list(indices)
    columns = context.design[:, indices]
    solved = context.solve(columns)
    denominators = 1.0 - np.einsum('ij,ij->j', columns, solved)
    projections = context.delta * solved / np.where(denominators == 0, 1.0, denominators)

    for k in np.flatnonzero(np.abs(denominators) < cfg.DOWNDATE_TOL):
        column = columns[:, k]
        console(f'downdate degenerate for column {indices[k]}; solving directly',
                level=Level.warning)
        downdated = context.gram_plus - np.outer(column, column)
        try:
            factor = linalg.cho_factor(downdated, lower=True, check_finite=False)
        except linalg.LinAlgError as err:
            raise FactorizationError(
                f'W_-j W_-j\' + delta I not positive definite for column {indices[k]}',
                MODULE) from err
        projections[:, k] = context.delta * linalg.cho_solve(factor, column, check_finite=False)
    return projections


def ao_projection(context: AoContext, j: int) -> np.ndarray:
    """The projection direction v_j of column j of the design."""
    return ao_projections(context, [j])[:, 0]


def two_sided_p(z: float) -> float:
    """2 (1 - Phi(|z|)), computed from the lower tail for accuracy."""
    return float(min(1.0, 2.0 * special.ndtr(-abs(z))))


def p_from_estimate(estimate: float, se: float) -> float:
    if se > 0:
        return two_sided_p(estimate / se)
    return 0.0 if estimate != 0 else 1.0


def ao_beta_test(context: AoContext, j: int, v_j: np.ndarray) -> Tuple[float, float, float]:
    """
    Estimate, standard error and two-sided p-value for beta_j.

    :return: (beta_hat, se_beta, p_beta)
    """
    column = context.design[:, j]
    vm = float(v_j @ column)
    if abs(vm) <= cfg.PROJECTION_TOL * np.linalg.norm(v_j) * np.linalg.norm(column):
        raise DegenerateProjectionError(
            f'projection for column {j} is orthogonal to its mediator', MODULE)
    beta_hat = float(v_j @ context.outcome) / vm
    se_beta = float(np.sqrt((v_j @ v_j) * context.sigma_eps2)) / abs(vm)
    return beta_hat, se_beta, p_from_estimate(beta_hat, se_beta)


def realized_bias(context: AoContext, j: int, v_j: np.ndarray, eta: np.ndarray) -> float:
    """
    The bias term (v_j' M_j)^-1 v_j' W_-j eta_-j for known coefficients.

    :param eta: coefficients of every design column, eta[j] included; for a
        context from build_ao_context these are the p mediator betas.
    """
    column = context.design[:, j]
    vm = float(v_j @ column)
    return (float(v_j @ (context.design @ eta)) - vm * eta[j]) / vm


def _test_chunk(context: AoContext, indices: List[int]) -> List[Tuple[float, float, float]]:
    # One solve per column, so chunking never changes a result bit.
    return [ao_beta_test(context, j, ao_projection(context, j)) for j in indices]


def ao_beta_tests(context: AoContext, indices: Sequence[int],
                  workers: int = 1) -> List[Tuple[float, float, float]]:
    """
    ao_beta_test for every index, split across *workers* threads.
    Results come back in the order of *indices* whatever the worker count.
    """
    indices = [int(j) for j in indices]
    if workers <= 1 or len(indices) < 2:
        return _test_chunk(context, indices)
    chunks = [list(chunk) for chunk in np.array_split(indices, min(workers, len(indices)))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = pool.map(lambda chunk: _test_chunk(context, chunk), chunks)
    return [test for chunk in results for test in chunk]
