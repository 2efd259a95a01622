"""
Correlation structures of the mediator-model errors u_i ~ N_p(0, Sigma).

Samplers exploit each structure so that no p x p factorization is needed:
compound symmetry through one shared factor per row, Toeplitz (AR(1))
through the autoregressive recursion, the factor model directly.
sample_cholesky() is the generic reference sampler.
"""
import math

import numpy as np
from scipy import linalg, signal

from mediation.errors import ConfigError

MODULE = 'simulation'


def sample_cholesky(sigma: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """n rows from N_p(0, sigma) through the Cholesky factor of sigma."""
    try:
        lower = linalg.cholesky(sigma, lower=True)
    except linalg.LinAlgError as err:
        raise ConfigError(f'covariance matrix is not positive definite ({err})', MODULE) from err
    return rng.standard_normal((n, sigma.shape[0])) @ lower.T


class ErrorStructure:
    """The base class for all error correlation structures."""
    name = ''

    def sample(self, n, p, rng):
        """Returns an n x p matrix of error rows."""
        raise NotImplementedError()

    def covariance(self, p, **kwargs):
        """Returns the p x p covariance matrix."""
        raise NotImplementedError()

    def label(self):
        """Returns the name used in result tables."""
        raise NotImplementedError()


def _check_rho(rho):
    if not (math.isfinite(rho) and -1.0 < rho < 1.0):
        raise ConfigError(f'rho={rho} must lie in (-1, 1)', MODULE)


class CompoundSymmetry(ErrorStructure):
    """Sigma = (1 - rho) I + rho 11'."""
    name = 'cs'

    def __init__(self, rho):
        _check_rho(rho)
        self.rho = rho

    def covariance(self, p, **kwargs):
        return (1.0 - self.rho) * np.eye(p) + self.rho * np.ones((p, p))

    def sample(self, n, p, rng):
        if self.rho < 0:
            return sample_cholesky(self.covariance(p), n, rng)
        noise = rng.standard_normal((n, p))
        shared = rng.standard_normal(n)
        return math.sqrt(self.rho) * shared[:, None] + math.sqrt(1.0 - self.rho) * noise

    def label(self):
        return f'CS({self.rho:g})'


class Toeplitz(ErrorStructure):
    """Sigma_ij = rho^|i - j|."""
    name = 'toeplitz'

    def __init__(self, rho):
        _check_rho(rho)
        self.rho = rho

    def covariance(self, p, **kwargs):
        return linalg.toeplitz(self.rho ** np.arange(p))

    def sample(self, n, p, rng):
        # u_1 = e_1, u_j = rho u_(j-1) + sqrt(1 - rho^2) e_j along each row.
        scale = math.sqrt(1.0 - self.rho ** 2)
        innovations = rng.standard_normal((n, p))
        innovations[:, 0] /= scale
        return signal.lfilter([scale], [1.0, -self.rho], innovations, axis=1)

    def label(self):
        return f'Toeplitz({self.rho:g})'


class Factor(ErrorStructure):
    """u_ij = sum_l f_il lambda_lj + eta_ij with eta_ij ~ N(0, tau^2)."""
    name = 'factor'

    def __init__(self, r, tau):
        if int(r) != r or r < 1:
            raise ConfigError(f'factor count r={r} must be a positive integer', MODULE)
        if not (math.isfinite(tau) and tau > 0):
            raise ConfigError(f'tau={tau} must be > 0', MODULE)
        self.r = int(r)
        self.tau = tau

    def draw_loadings(self, p, rng):
        """Returns the r x p loading matrix."""
        return rng.standard_normal((self.r, p))

    def sample_given(self, loadings, n, rng):
        """Returns n error rows for fixed loadings."""
        factors = rng.standard_normal((n, self.r))
        noise = self.tau * rng.standard_normal((n, loadings.shape[1]))
        return factors @ loadings + noise

    def covariance(self, p, loadings=None, **kwargs):
        if loadings is None:
            raise ConfigError('the factor covariance is conditional on the loadings', MODULE)
        return loadings.T @ loadings + self.tau ** 2 * np.eye(p)

    def sample(self, n, p, rng):
        return self.sample_given(self.draw_loadings(p, rng), n, rng)

    def label(self):
        return f'Factor(r={self.r},tau={self.tau:g})'


structures_dict = {
    'cs': CompoundSymmetry,
    'toeplitz': Toeplitz,
    'factor': Factor,
}
