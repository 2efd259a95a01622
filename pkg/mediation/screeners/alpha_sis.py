from mediation.screener import Screener, outcome_placeholder


class AlphaSis(Screener):
    """Ranks by the marginal exposure effect |alpha_hat_j| alone."""
    name = 'alpha_sis'

    def _outcome_factor(self, dataset):
        return outcome_placeholder(dataset)
