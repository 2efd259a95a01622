from mediation import screening
from mediation.screener import Screener


class ProductSis(Screener):
    """Ranks by |alpha_hat_j * beta_check_j| from two marginal models."""
    name = 'product_sis'

    def _outcome_factor(self, dataset):
        return screening.marginal_beta_fit(dataset, self.intercept)
