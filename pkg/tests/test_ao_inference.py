import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from mediation.ao_inference import (AoConfig, AoContext, ao_beta_test, ao_beta_tests,
                                    ao_projection, ao_projections, build_ao_context,
                                    estimate_sigma_eps2, p_from_estimate, realized_bias,
                                    refitted_cv_sigma_eps2, split_rows, two_sided_p)
from mediation.core_model import CandidateSet, make_dataset
from mediation.errors import ConfigError, DegenerateProjectionError, RankDeficientError
from mediation.screeners import Holp
from mediation.simulation import SimScenario, gen_coefficients, gen_dataset, replication_rng


def _candidates(indices):
    return CandidateSet(indices=tuple(indices), scores=np.zeros(len(indices)), d=len(indices))


def _direct_projection(design, j, delta):
    others = np.delete(design, j, axis=1)
    system = others @ others.T + delta * np.eye(design.shape[0])
    return delta * np.linalg.solve(system, design[:, j])


def test_config_validation():
    with pytest.raises(ConfigError):
        AoConfig(delta=0.0)
    with pytest.raises(ConfigError):
        AoConfig(sigma_eps_method='median')


def test_context_solve_matches_dense_inverse(rng):
    design = rng.normal(size=(5, 9))
    context = AoContext.from_design(design, rng.normal(size=5), delta=1.0)
    dense = np.linalg.inv(design @ design.T + np.eye(5))
    for i in range(5):
        assert_allclose(context.solve(np.eye(5)[:, i]), dense[:, i], rtol=1e-8)


def test_context_does_not_freeze_the_callers_array(rng):
    design = rng.normal(size=(5, 9))
    AoContext.from_design(design, rng.normal(size=5))
    design[0, 0] = 1.0


@pytest.mark.parametrize('n,p,delta', [(6, 10, 1.0), (30, 45, 0.5), (50, 80, 2.0)])
def test_downdate_matches_direct_solve(rng, n, p, delta):
    design = rng.normal(size=(n, p + 1))
    context = AoContext.from_design(design, rng.normal(size=n), delta=delta)
    projections = ao_projections(context, range(p))
    for j in range(p):
        assert_allclose(projections[:, j], _direct_projection(design, j, delta), rtol=1e-6)


def test_single_column_projection_is_the_column(rng):
    m = rng.normal(size=12)
    y = 1.5 * m + rng.normal(size=12)
    context = AoContext.from_design(m[:, None], y, delta=1.0, sigma_eps2=1.0)
    v = ao_projection(context, 0)
    assert_allclose(v, m, rtol=1e-10)
    beta_hat, _, _ = ao_beta_test(context, 0, v)
    assert beta_hat == pytest.approx(m @ y / (m @ m), rel=1e-10)


def test_projection_is_nearly_orthogonal_to_the_other_columns(rng):
    n = 40
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    design = q[:, :20] * 3.0
    context = AoContext.from_design(design, rng.normal(size=n), delta=0.01)
    v = ao_projection(context, 4)
    cross = np.abs(v @ np.delete(design, 4, axis=1))
    assert cross.max() < 1e-2 * abs(v @ design[:, 4])


def test_hand_evaluated_statistic():
    # v = e1, M_j = 2 e1, Y = 4 e1: v'M = 2, v'Y = 4, v'v = 1.
    v = np.array([1.0, 0.0, 0.0])
    design = np.array([[2.0], [0.0], [0.0]])
    context = AoContext.from_design(design, np.array([4.0, 0.0, 0.0]), sigma_eps2=1.0)
    beta_hat, se_beta, p_beta = ao_beta_test(context, 0, v)
    assert beta_hat == pytest.approx(2.0)
    assert se_beta == pytest.approx(0.5)
    assert p_beta == pytest.approx(2 * stats.norm.sf(4.0), rel=1e-12)
    assert p_beta == pytest.approx(6.334e-5, rel=1e-3)


def test_zero_outcome_is_not_significant(rng):
    design = rng.normal(size=(8, 12))
    context = AoContext.from_design(design, np.zeros(8), sigma_eps2=1.0)
    beta_hat, _, p_beta = ao_beta_test(context, 3, ao_projection(context, 3))
    assert beta_hat == 0.0 and p_beta == 1.0


def test_degenerate_projection_raises():
    design = np.array([[1.0], [0.0], [0.0]])
    context = AoContext.from_design(design, np.ones(3), sigma_eps2=1.0)
    with pytest.raises(DegenerateProjectionError):
        ao_beta_test(context, 0, np.array([0.0, 1.0, 0.0]))


def test_two_sided_p():
    assert two_sided_p(0.0) == 1.0
    assert two_sided_p(1.959964) == pytest.approx(0.05, abs=1e-5)
    assert two_sided_p(-3.0) == two_sided_p(3.0)
    assert 0.0 < two_sided_p(8.0) < 1e-14
    assert p_from_estimate(0.3, 0.0) == 0.0
    assert p_from_estimate(0.0, 0.0) == 1.0


def test_sigma_eps_perfect_fit(rng):
    n = 20
    x = rng.normal(size=n)
    mediators = rng.normal(size=(n, 6))
    y = mediators[:, [1, 4]] @ [0.7, -1.2] + 0.5 * x
    ds = make_dataset(x, mediators, y)
    assert estimate_sigma_eps2(ds, _candidates([1, 4, 2])) == pytest.approx(0.0, abs=1e-20)


def test_sigma_eps_pure_noise(rng):
    ds = make_dataset(rng.normal(size=500), rng.normal(size=(500, 40)), rng.normal(size=500))
    assert 0.8 <= estimate_sigma_eps2(ds, _candidates(range(10))) <= 1.2


@pytest.mark.parametrize('intercept', [False, True])
def test_sigma_eps_matches_normal_equations(rng, intercept):
    ds = make_dataset(rng.normal(size=30), rng.normal(size=(30, 8)), rng.normal(size=30),
                      covariates=rng.normal(size=(30, 1)))
    columns = [ds.mediators[:, [6, 0, 3]], ds.exposure, ds.covariates]
    if intercept:
        columns.append(np.ones(30))
    design = np.column_stack(columns)
    coef = np.linalg.solve(design.T @ design, design.T @ ds.outcome)
    resid = ds.outcome - design @ coef
    expected = resid @ resid / (30 - design.shape[1])
    got = estimate_sigma_eps2(ds, _candidates([6, 0, 3]), intercept=intercept)
    assert got == pytest.approx(expected, rel=1e-10)


def test_sigma_eps_drops_collinear_columns(rng, caplog):
    mediators = rng.normal(size=(25, 5))
    mediators[:, 3] = 2.0 * mediators[:, 1]
    ds = make_dataset(rng.normal(size=25), mediators, rng.normal(size=25))
    with caplog.at_level(logging.WARNING, logger='mediation'):
        got = estimate_sigma_eps2(ds, _candidates([1, 3, 0]))
    assert 'collinear' in caplog.text
    expected = estimate_sigma_eps2(ds, _candidates([1, 0]))
    assert got == pytest.approx(expected, rel=1e-8)


def test_sigma_eps_needs_more_rows_than_columns(rng):
    ds = make_dataset(rng.normal(size=6), rng.normal(size=(6, 10)), rng.normal(size=6))
    with pytest.raises(RankDeficientError):
        estimate_sigma_eps2(ds, _candidates(range(5)))


def test_context_is_deterministic(small_dataset):
    candidates = Holp().screen(small_dataset, 6)
    first = build_ao_context(small_dataset, candidates)
    second = build_ao_context(small_dataset, candidates)
    assert first.sigma_eps2 == second.sigma_eps2


def test_sign_equivariance(small_dataset):
    candidates = _candidates([0, 1, 2])
    flipped_mediators = small_dataset.mediators.copy()
    flipped_mediators[:, 1] *= -1
    flipped = make_dataset(small_dataset.exposure, flipped_mediators, small_dataset.outcome)

    context = build_ao_context(small_dataset, candidates)
    flipped_context = build_ao_context(flipped, candidates)
    beta, se, p = ao_beta_test(context, 1, ao_projection(context, 1))
    f_beta, f_se, f_p = ao_beta_test(flipped_context, 1, ao_projection(flipped_context, 1))
    assert f_beta == pytest.approx(-beta, rel=1e-9)
    assert f_se == pytest.approx(se, rel=1e-9)
    assert f_p == pytest.approx(p, rel=1e-7)


def test_thread_count_does_not_change_results(small_dataset):
    candidates = Holp().screen(small_dataset, 9)
    context = build_ao_context(small_dataset, candidates)
    serial = ao_beta_tests(context, candidates.indices, workers=1)
    threaded = ao_beta_tests(context, candidates.indices, workers=4)
    assert serial == threaded


def test_realized_bias_is_the_noise_free_error(rng):
    n, p = 25, 40
    design = rng.normal(size=(n, p + 1))
    eta = np.zeros(p + 1)
    eta[[0, 3, 7]] = [0.8, -0.5, 0.6]
    eta[-1] = 0.5
    context = AoContext.from_design(design, design @ eta, sigma_eps2=1.0)
    for j in (0, 3, 10):
        v = ao_projection(context, j)
        beta_hat, _, _ = ao_beta_test(context, j, v)
        assert realized_bias(context, j, v, eta) == pytest.approx(beta_hat - eta[j], abs=1e-9)


@pytest.mark.slow
def test_null_beta_test_is_calibrated():
    scenario = SimScenario(n=200, p=400, s11=4, structure='cs', rho=0.5, replications=500)
    p_values = []
    for replication in range(scenario.replications):
        rng = replication_rng(11, replication)
        truth = gen_coefficients(scenario, rng)
        # alpha stays active while the outcome model ignores every mediator.
        null_truth = type(truth)(alpha=truth.alpha, beta=np.zeros(scenario.p), gamma=0.5)
        dataset, _ = gen_dataset(scenario, null_truth, rng)
        candidates = Holp().screen(dataset)
        context = build_ao_context(dataset, candidates)
        p_values.append(ao_beta_test(context, 0, ao_projection(context, 0))[2])
    p_values = np.array(p_values)
    assert 0.02 <= np.mean(p_values <= 0.05) <= 0.09
    assert stats.kstest(p_values, 'uniform').pvalue > 0.01


def test_split_rows_is_a_fixed_partition():
    first, second = split_rows(11)
    assert (first.size, second.size) == (5, 6)
    assert sorted(np.r_[first, second]) == list(range(11))
    assert np.array_equal(split_rows(11)[0], first)
    assert np.all(np.diff(first) > 0) and np.all(np.diff(second) > 0)


def test_refitted_cv_is_not_shrunk_by_selection():
    cv, refit = [], []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        ds = make_dataset(rng.normal(size=200), rng.normal(size=(200, 400)),
                          rng.normal(size=200))
        cv.append(refitted_cv_sigma_eps2(ds))
        refit.append(estimate_sigma_eps2(ds, Holp().screen(ds)))
    assert 0.85 <= np.mean(cv) <= 1.15
    assert np.mean(refit) < np.mean(cv)


def test_refitted_cv_falls_back_on_tiny_samples(rng, caplog):
    ds = make_dataset(rng.normal(size=5), rng.normal(size=(5, 3)), rng.normal(size=5))
    with pytest.raises(RankDeficientError):
        refitted_cv_sigma_eps2(ds)
    candidates = _candidates([0, 2])
    with caplog.at_level(logging.WARNING, logger='mediation'):
        context = build_ao_context(ds, candidates)
    assert 'candidate refit' in caplog.text
    assert context.sigma_eps2 == estimate_sigma_eps2(ds, candidates)


@pytest.mark.parametrize('intercept', [False, True])
def test_projection_is_orthogonal_to_the_nuisance(small_dataset, intercept):
    context = build_ao_context(small_dataset, _candidates([0, 1, 2]), intercept=intercept)
    for j in (0, 1, 5):
        v = ao_projection(context, j)
        assert abs(v @ small_dataset.exposure) < 1e-10 * np.linalg.norm(v)
        if intercept:
            assert abs(v.sum()) < 1e-10 * np.linalg.norm(v)


def test_direct_effect_does_not_enter_the_estimate(rng):
    n, p = 40, 60
    x = rng.normal(size=n)
    mediators = rng.normal(size=(n, p)) + np.outer(x, np.full(p, 0.8))
    ds = make_dataset(x, mediators, 2.5 * x)
    context = build_ao_context(ds, _candidates(range(5)),
                               AoConfig(sigma_eps_method='refit_on_candidates'))
    for j in range(5):
        beta_hat, _, _ = ao_beta_test(context, j, ao_projection(context, j))
        assert beta_hat == pytest.approx(0.0, abs=1e-10)


def test_shared_gram_gives_the_same_context(small_dataset):
    candidates = _candidates([0, 1, 2])
    gram = small_dataset.design() @ small_dataset.design().T
    shared = build_ao_context(small_dataset, candidates, gram=gram)
    fresh = build_ao_context(small_dataset, candidates)
    assert_allclose(shared.gram_plus, fresh.gram_plus, atol=1e-9)
    assert shared.sigma_eps2 == fresh.sigma_eps2
