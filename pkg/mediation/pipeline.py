"""
The three-step procedure end to end: screen with Ridge-HOLP, test each
candidate (marginal alpha test, AO beta test), then select the discoveries
under composite-null FDR control.
"""
from dataclasses import dataclass
from typing import FrozenSet

from mediation import config as cfg
from mediation.ao_inference import (AoConfig, AoContext, ao_beta_tests, build_ao_context,
                                    p_from_estimate)
from mediation.composite_fdr import PairedPValues, discover, fit_fdr_model
from mediation.core_model import CandidateSet, Dataset, FdrModel, TestRecord
from mediation.output import console, Level
from mediation.results import TestResults
from mediation.screeners import Holp
from mediation.screening import RholpConfig, gram_matrix, MarginalAlphaFit


@dataclass(frozen=True, eq=False)
class ChimaResult:
    """Everything a run produces."""
    candidates: CandidateSet
    records: TestResults
    fdr: FdrModel
    discoveries: FrozenSet[int]
    alpha_fit: MarginalAlphaFit
    context: AoContext


def _test_record(j: int, alpha_fit, beta_test) -> TestRecord:
    alpha_hat = float(alpha_fit.alpha_hat[j])
    se_alpha = float(alpha_fit.se_alpha[j])
    beta_hat, se_beta, p_beta = beta_test
    return TestRecord(index=j, alpha_hat=alpha_hat, se_alpha=se_alpha,
                      p_alpha=p_from_estimate(alpha_hat, se_alpha),
                      beta_hat=beta_hat, se_beta=se_beta, p_beta=p_beta)


def run_chima(dataset: Dataset, rholp: RholpConfig = None, ao: AoConfig = None,
              lam: float = cfg.NULL_LAMBDA, alpha_level: float = cfg.ALPHA_LEVEL,
              intercept: bool = False, workers: int = 1) -> ChimaResult:
    """
    Run screening, inference and FDR control on one dataset.

    :param dataset: validated Dataset.
    :param rholp: screening configuration.
    :param ao: projection configuration.
    :param lam: tuning constant of the null-proportion estimates.
    :param alpha_level: target FDR.
    :param intercept: fit intercepts (columns are centered before the
        dual-form solves and marginal models get a constant column).
    :param workers: threads for the per-candidate tests.
    """
    rholp = rholp or RholpConfig()
    ao = ao or AoConfig()
    work = dataset.centered() if intercept else dataset

    # ZZ' feeds RHOLP and, with the nuisance part removed, the AO factorization.
    gram = gram_matrix(work.design())

    screener = Holp(intercept=intercept, rholp=rholp)
    screener.gram = gram
    candidates = screener.screen(dataset, rholp.resolve_d(dataset.n, dataset.p))
    alpha_fit = screener.alpha_fit
    console(f'Screening kept {len(candidates)} of {dataset.p} mediators', level=Level.debug)

    context = build_ao_context(work, candidates, ao, intercept=intercept, gram=gram)
    beta_tests = ao_beta_tests(context, candidates.indices, workers)

    records = TestResults()
    records.extend(_test_record(j, alpha_fit, beta_test)
                   for j, beta_test in zip(candidates.indices, beta_tests))

    pairs = PairedPValues.from_results(records)
    fdr = fit_fdr_model(pairs, lam, alpha_level)
    discoveries = discover(pairs, fdr.t_hat)
    console(f'{len(discoveries)} discoveries at t_hat = {fdr.t_hat:.4g}', level=Level.debug)
    return ChimaResult(candidates=candidates, records=records, fdr=fdr,
                       discoveries=discoveries, alpha_fit=alpha_fit, context=context)
