from mediation import config as cfg
from mediation import screening
from mediation.screener import Screener


class Holp(Screener):
    """Ranks by |alpha_hat_j * beta_tilde_j| with Ridge-HOLP beta_tilde."""
    name = 'holp'

    def __init__(self, intercept=False, rholp=None):
        super().__init__(intercept)
        self.rholp = rholp or screening.RholpConfig()
        self.gram = None
        """Optional precomputed ZZ' reused by RHOLP."""

    def _default_d(self, n):
        return self.rholp.d or cfg.screen_size(n)

    def _outcome_factor(self, dataset):
        if self.intercept:
            dataset = dataset.centered()
        beta_tilde = screening.rholp_estimates(
            dataset, self.rholp.k, self.rholp.standardize, gram=self.gram)
        return beta_tilde[:dataset.p]
