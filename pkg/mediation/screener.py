import numpy as np

from mediation import config as cfg
from mediation import screening
from mediation.core_model import CandidateSet, Dataset
from mediation.output import console, Level


class Screener:
    """The base class for all mediator screeners."""
    name = ''

    def __init__(self, intercept=False):
        """
        :param bool intercept: optional, fit an intercept in marginal models
        """
        self.intercept = intercept
        self.alpha_fit = None
        """The marginal mediator-model fit of the last screen."""

    def _outcome_factor(self, dataset):
        """Returns the outcome-side factor of the ranking score."""
        raise NotImplementedError()

    def _default_d(self, n):
        """Returns the candidate count used when none is given."""
        return cfg.baseline_screen_size(n)

    def screen(self, dataset: Dataset, d=None) -> CandidateSet:
        """Ranks mediators by |alpha_hat_j * factor_j| and keeps the top d.

        :param dataset: the validated Dataset
        :param d: int Optional, the candidate count
        :returns CandidateSet
        """
        d = d or self._default_d(dataset.n)
        self.alpha_fit = screening.marginal_alpha_fit(dataset, self.intercept)
        candidates = screening.select_candidates(
            self.alpha_fit.alpha_hat, self._outcome_factor(dataset), d)
        console(f'{self.name}: kept {len(candidates)} of {dataset.p} mediators',
                level=Level.debug)
        return candidates

    def __repr__(self):
        return f'<{self.__class__.__name__} intercept={self.intercept}>'


def outcome_placeholder(dataset):
    """Unit outcome factor, so the ranking reduces to |alpha_hat_j|."""
    return np.ones(dataset.p)
