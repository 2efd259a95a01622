"""
Simulated data under the linear structural equation model

    M_j = alpha_j X + u_j,     Y = sum_j beta_j M_j + gamma X + eps.

Coefficient scheme for s11 active mediators: alpha_j is non-zero on the
first 1.5 * s11 indices; beta_j is non-zero on the first s11 indices and on
the s11 / 2 indices after a gap of s11 / 2 zeros. Non-zero magnitudes are
uniform on the configured range with independent random signs.
"""
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from mediation import config as cfg
from mediation.core_model import Dataset, ModelTruth, make_dataset, synthetic_names
from mediation.errors import ConfigError
from mediation.simulation.structures import ErrorStructure, structures_dict

MODULE = 'simulation'

METHODS = ('CHIMA', 'alpha_sis_screen_only', 'product_sis_screen_only')


@dataclass(frozen=True)
class SimScenario:
    """One cell of the simulation study."""
    n: int = cfg.SIM_N
    p: int = 8000
    s11: int = 4
    structure: str = 'cs'
    rho: float = 0.85
    r: int = 2
    tau: float = 0.8
    coef_range: Tuple[float, float] = cfg.SIM_COEF_RANGE
    gamma: float = cfg.SIM_GAMMA
    x_variance: float = cfg.SIM_X_VARIANCE
    x_scale: str = 'variance'
    eps_variance: float = cfg.SIM_EPS_VARIANCE
    replications: int = cfg.SIM_REPLICATIONS
    alpha_level: float = cfg.ALPHA_LEVEL
    seed: int = 0
    methods: Tuple[str, ...] = METHODS
    k: float = cfg.RIDGE_K
    delta: float = cfg.AO_DELTA
    lam: float = cfg.NULL_LAMBDA
    d: Optional[int] = None
    d_baseline: Optional[int] = None
    standardize: bool = False
    errors: ErrorStructure = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.structure not in structures_dict:
            raise ConfigError(f'unknown structure "{self.structure}"; '
                              f'choose from {", ".join(structures_dict)}', MODULE)
        if self.structure == 'factor':
            errors = structures_dict['factor'](self.r, self.tau)
        else:
            errors = structures_dict[self.structure](self.rho)
        object.__setattr__(self, 'errors', errors)
        object.__setattr__(self, 'methods', tuple(self.methods))
        object.__setattr__(self, 'coef_range', tuple(float(c) for c in self.coef_range))

        if self.s11 < 2 or self.s11 % 2:
            raise ConfigError(f's11={self.s11} must be a positive even number', MODULE)
        if self.n < cfg.MIN_SAMPLES:
            raise ConfigError(f'n={self.n} below {cfg.MIN_SAMPLES}', MODULE)
        if 2 * self.s11 > self.p:
            raise ConfigError(f'scheme needs p >= 2 * s11 = {2 * self.s11}', MODULE)
        # Compound symmetry is positive definite only for rho > -1 / (p - 1).
        if self.structure == 'cs' and self.rho < 0 and self.rho <= -1.0 / (self.p - 1):
            raise ConfigError(f'compound symmetry with rho={self.rho} is not positive definite '
                              f'for p={self.p}; need rho > {-1.0 / (self.p - 1):.6g}', MODULE)
        low, high = self.coef_range
        if not 0 < low <= high:
            raise ConfigError(f'coefficient range {self.coef_range} invalid', MODULE)
        if self.x_scale not in ('variance', 'sd'):
            raise ConfigError(f'x_scale must be "variance" or "sd", got "{self.x_scale}"', MODULE)
        if self.x_variance <= 0 or self.eps_variance <= 0:
            raise ConfigError('x_variance and eps_variance must be > 0', MODULE)
        if self.replications < 1:
            raise ConfigError(f'replications={self.replications} must be >= 1', MODULE)
        if not 0 < self.alpha_level < 1:
            raise ConfigError(f'alpha_level={self.alpha_level} outside (0, 1)', MODULE)
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ConfigError(f'unknown method(s) {sorted(unknown)}; '
                              f'choose from {", ".join(METHODS)}', MODULE)

    @property
    def x_sd(self) -> float:
        return math.sqrt(self.x_variance) if self.x_scale == 'variance' else self.x_variance


def replication_rng(seed: int, replication: int, attempt: int = 0) -> np.random.Generator:
    """
    The random stream of one replication.
    The SeedSequence entropy is (seed, replication, attempt); attempt > 0
    marks a redraw after a failed replication.
    """
    return np.random.default_rng(np.random.SeedSequence([seed, replication, attempt]))


def gen_coefficients(scenario: SimScenario, rng: np.random.Generator) -> ModelTruth:
    """Draws alpha, beta under the scenario's sparsity scheme."""
    s11, p = scenario.s11, scenario.p
    if 2 * s11 > p:
        raise ConfigError(f'scheme needs p >= 2 * s11 = {2 * s11}', MODULE)
    low, high = scenario.coef_range
    half = s11 // 2

    def draw(size):
        magnitudes = rng.uniform(low, high, size)
        signs = rng.choice([-1.0, 1.0], size)
        return magnitudes * signs

    alpha = np.zeros(p)
    alpha[:s11 + half] = draw(s11 + half)
    beta = np.zeros(p)
    beta_support = np.r_[0:s11, s11 + half:2 * s11]
    beta[beta_support] = draw(beta_support.size)
    return ModelTruth(alpha=alpha, beta=beta, gamma=scenario.gamma)


def gen_errors(structure: ErrorStructure, n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """The n x p matrix of mediator-model errors."""
    return structure.sample(n, p, rng)


def gen_dataset(scenario: SimScenario, truth: ModelTruth,
                rng: np.random.Generator) -> Tuple[Dataset, ModelTruth]:
    """
    Draws X, the errors U and eps, in that order, and builds M and Y.
    """
    n, p = scenario.n, scenario.p
    exposure = rng.normal(0.0, scenario.x_sd, n)
    errors = gen_errors(scenario.errors, n, p, rng)
    eps = rng.normal(0.0, math.sqrt(scenario.eps_variance), n)
    mediators = np.outer(exposure, truth.alpha) + errors
    outcome = mediators @ truth.beta + truth.gamma * exposure + eps
    dataset = make_dataset(exposure, mediators, outcome, mediator_names=synthetic_names(p))
    return dataset, truth
