import logging
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from chima_utils import files
from mediation.core_model import ModelTruth
from mediation.errors import (ConfigError, ConstantColumnError, NumericalError,
                              SingularGramError)
from mediation.simulation import (SimScenario, evaluate_replication, gen_coefficients,
                                  gen_dataset, gen_errors, replication_rng, run_study,
                                  structures_dict)
from mediation.simulation import study
from mediation.simulation.structures import (CompoundSymmetry, Factor, Toeplitz,
                                             sample_cholesky)
from mediation.simulation.study import ReplicationRecord


def _small_scenario(**overrides):
    values = dict(n=60, p=80, s11=2, structure='cs', rho=0.5, replications=3, seed=9)
    values.update(overrides)
    return SimScenario(**values)


@pytest.mark.parametrize('s11', [4, 6])
def test_coefficient_scheme(s11):
    scenario = SimScenario(p=40, s11=s11)
    truth = gen_coefficients(scenario, replication_rng(1, 0))
    half = s11 // 2
    assert_array_equal(np.flatnonzero(truth.alpha), np.arange(s11 + half))
    assert_array_equal(np.flatnonzero(truth.beta),
                       np.r_[0:s11, s11 + half:2 * s11])
    assert truth.active_set == tuple(range(s11))
    low, high = scenario.coef_range
    for values in (truth.alpha, truth.beta):
        magnitudes = np.abs(values[values != 0])
        assert np.all((magnitudes >= low) & (magnitudes <= high))
    assert truth.gamma == scenario.gamma


def test_coefficient_range_is_configurable():
    scenario = SimScenario(p=40, s11=4, coef_range=(0.5, 1.0))
    truth = gen_coefficients(scenario, replication_rng(2, 0))
    assert np.abs(truth.alpha[truth.alpha != 0]).min() >= 0.5


@pytest.mark.parametrize('overrides', [
    dict(p=6, s11=4),
    dict(s11=3),
    dict(s11=0),
    dict(rho=1.5),
    dict(rho=-0.5, p=8, s11=2),
    dict(rho=-1 / 7, p=8, s11=2),
    dict(structure='toeplitz', rho=-1.0),
    dict(structure='factor', r=0),
    dict(structure='factor', tau=0.0),
    dict(structure='banded'),
    dict(coef_range=(1.0, 0.5)),
    dict(x_scale='range'),
    dict(replications=0),
    dict(alpha_level=1.0),
    dict(methods=('CHIMA', 'lasso')),
    dict(methods=()),
    dict(n=3),
])
def test_scenario_rejects_bad_values(overrides):
    with pytest.raises(ConfigError):
        SimScenario(**overrides)


def test_scenario_accepts_negative_cs_inside_the_bound():
    scenario = SimScenario(rho=-0.1, p=8, s11=2)
    assert scenario.errors.label() == 'CS(-0.1)'


def test_scenario_exposure_scale():
    assert SimScenario().x_sd == pytest.approx(np.sqrt(1.5))
    assert SimScenario(x_scale='sd').x_sd == 1.5
    assert SimScenario(structure='factor', r=4).errors.label() == 'Factor(r=4,tau=0.8)'


def test_replication_streams_are_independent():
    first = replication_rng(5, 0).standard_normal(4)
    assert_array_equal(first, replication_rng(5, 0).standard_normal(4))
    assert not np.array_equal(first, replication_rng(5, 1).standard_normal(4))
    assert not np.array_equal(first, replication_rng(5, 0, attempt=1).standard_normal(4))


def test_cs_without_correlation_is_white(rng):
    sample = CompoundSymmetry(0.0).sample(20000, 20, rng)
    corr = np.corrcoef(sample, rowvar=False)
    off_diagonal = corr[~np.eye(20, dtype=bool)]
    assert np.abs(off_diagonal).max() < 0.035


def test_cs_correlation(rng):
    sample = CompoundSymmetry(0.5).sample(20000, 10, rng)
    corr = np.corrcoef(sample, rowvar=False)
    assert corr[~np.eye(10, dtype=bool)].mean() == pytest.approx(0.5, abs=0.02)


def test_negative_toeplitz_lags(rng):
    sample = gen_errors(Toeplitz(-0.85), 20000, 50, rng)
    assert_allclose(sample.var(axis=0).mean(), 1.0, atol=0.02)
    lag1 = np.mean([np.corrcoef(sample[:, j], sample[:, j + 1])[0, 1] for j in range(49)])
    lag2 = np.mean([np.corrcoef(sample[:, j], sample[:, j + 2])[0, 1] for j in range(48)])
    assert -0.87 <= lag1 <= -0.83
    assert 0.70 <= lag2 <= 0.745


def test_factor_variances_given_loadings(rng):
    structure = Factor(r=2, tau=0.8)
    loadings = structure.draw_loadings(10, rng)
    sample = structure.sample_given(loadings, 20000, rng)
    expected = np.diag(structure.covariance(10, loadings=loadings))
    assert_allclose(sample.var(axis=0), expected, rtol=0.05)


def test_factor_covariance_needs_loadings():
    with pytest.raises(ConfigError):
        Factor(r=2, tau=0.8).covariance(5)


def test_cholesky_rejects_indefinite_matrix(rng):
    with pytest.raises(ConfigError):
        sample_cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]), 5, rng)


def test_negative_cs_falls_back_to_cholesky(rng):
    sample = CompoundSymmetry(-0.02).sample(30000, 5, rng)
    corr = np.corrcoef(sample, rowvar=False)
    assert corr[~np.eye(5, dtype=bool)].mean() == pytest.approx(-0.02, abs=0.01)


def _empirical_covariance(draw, p, chunks=10, size=100_000):
    total = np.zeros((p, p))
    for _ in range(chunks):
        x = draw(size)
        total += x.T @ x
    return total / (chunks * size)


@pytest.mark.slow
@pytest.mark.parametrize('structure', [CompoundSymmetry(0.5), Toeplitz(0.5), Toeplitz(-0.5)])
def test_samplers_match_their_covariance(structure):
    rng = np.random.default_rng(17)
    p = 30
    sigma = structure.covariance(p)
    for draw in (lambda size: structure.sample(size, p, rng),
                 lambda size: sample_cholesky(sigma, size, rng)):
        empirical = _empirical_covariance(draw, p)
        assert np.linalg.norm(empirical - sigma) / np.linalg.norm(sigma) <= 0.1


@pytest.mark.slow
def test_factor_sampler_matches_its_covariance():
    rng = np.random.default_rng(19)
    structure = Factor(r=2, tau=0.8)
    loadings = structure.draw_loadings(30, rng)
    sigma = structure.covariance(30, loadings=loadings)
    empirical = _empirical_covariance(lambda size: structure.sample_given(loadings, size, rng), 30)
    assert np.linalg.norm(empirical - sigma) / np.linalg.norm(sigma) <= 0.1


def test_dataset_replays_its_draws():
    scenario = SimScenario(n=6, p=4, s11=2)
    truth = ModelTruth(alpha=np.zeros(4), beta=np.zeros(4), gamma=0.0)
    dataset, returned = gen_dataset(scenario, truth, np.random.default_rng(3))
    assert returned is truth

    replay = np.random.default_rng(3)
    exposure = replay.normal(0.0, scenario.x_sd, 6)
    errors = scenario.errors.sample(6, 4, replay)
    eps = replay.normal(0.0, 1.0, 6)
    assert_allclose(dataset.exposure, exposure)
    assert_allclose(dataset.mediators, errors)
    assert_allclose(dataset.outcome, eps)
    assert dataset.mediator_names == ('M0001', 'M0002', 'M0003', 'M0004')


def test_dataset_follows_the_structural_model():
    scenario = SimScenario(n=50, p=12, s11=2)
    rng = replication_rng(4, 0)
    truth = gen_coefficients(scenario, rng)
    dataset, _ = gen_dataset(scenario, truth, rng)
    residual_m = dataset.mediators - np.outer(dataset.exposure, truth.alpha)
    assert residual_m.shape == (50, 12)
    eps = dataset.outcome - dataset.mediators @ truth.beta - truth.gamma * dataset.exposure
    assert abs(eps.mean()) < 0.5
    assert eps.var() == pytest.approx(1.0, abs=0.5)


def test_evaluate_replication_examples():
    truth = ModelTruth(alpha=[1, 1, 1, 1, 0, 0, 0, 0, 0, 0], beta=[1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
                       gamma=0.5)
    assert evaluate_replication(truth, [0, 1, 5, 9], {0, 1, 9}) == (2, 2, 1)
    assert evaluate_replication(truth, range(10), range(4)) == (4, 4, 0)

    record = ReplicationRecord(0, 0, 'CHIMA', 4, captured=2, true_pos=2, false_pos=1)
    assert record.screening_rate == 0.5
    assert record.power == 0.5
    assert record.fdp == pytest.approx(1 / 3)

    empty = ReplicationRecord(0, 0, 'CHIMA', 4, captured=4, true_pos=0, false_pos=0)
    assert empty.power == 0.0 and empty.fdp == 0.0

    screen_only = ReplicationRecord(0, 0, 'alpha_sis_screen_only', 4, captured=3)
    assert screen_only.power is None and screen_only.fdp is None
    assert screen_only.row()[4:7] == ('NA', 'NA', 'NA')


def test_study_is_deterministic():
    scenario = _small_scenario()
    first = run_study(scenario)
    second = run_study(scenario)
    assert first.replication_rows() == second.replication_rows()
    assert first.table_rows() == second.table_rows()


def test_study_does_not_depend_on_workers():
    scenario = _small_scenario(replications=2)
    assert (run_study(scenario, workers=2).replication_rows()
            == run_study(scenario, workers=1).replication_rows())


def test_study_metrics_and_table():
    result = run_study(_small_scenario())
    assert len(result.records) == 3 * 3
    for record in result.records:
        for metric in ('screening_rate', 'power', 'fdp'):
            value = getattr(record, metric)
            assert value is None or 0.0 <= value <= 1.0

    rows = result.table_rows()
    assert len(rows) == 5
    assert {row[2] for row in rows} == set(result.scenario.methods)
    assert all(row[0] == 'CS(0.5)' and row[1] == 2 and row[5] == 3 for row in rows)
    assert set(result.means('alpha_sis_screen_only')) == {'screening_rate'}
    assert set(result.means('CHIMA')) == {'screening_rate', 'power', 'fdp'}


def test_study_method_subset():
    result = run_study(_small_scenario(replications=1), methods=['alpha_sis_screen_only'])
    assert result.methods() == ['alpha_sis_screen_only']
    assert len(result.table_rows()) == 1


def test_failed_replication_is_redrawn(monkeypatch):
    original = study._run_methods

    def flaky(scenario, truth, dataset, replication, attempt):
        if replication == 1 and attempt == 0:
            raise SingularGramError('singular', 'screening')
        return original(scenario, truth, dataset, replication, attempt)

    monkeypatch.setattr(study, '_run_methods', flaky)
    result = run_study(_small_scenario())
    assert result.redraws == 1
    assert {r.attempt for r in result.records if r.replication == 1} == {1}
    assert {r.attempt for r in result.records if r.replication != 1} == {0}


def test_failed_generation_is_redrawn(monkeypatch):
    original = study.gen_dataset
    calls = []

    def flaky(scenario, truth, rng):
        calls.append(1)
        if len(calls) == 1:
            raise ConstantColumnError('constant mediator', 'simulation')
        return original(scenario, truth, rng)

    monkeypatch.setattr(study, 'gen_dataset', flaky)
    records, redraws = study.run_replication(_small_scenario(), 0)
    assert redraws == 1
    assert {r.attempt for r in records} == {1}


def test_bad_structure_is_not_redrawn(monkeypatch):
    calls = []

    def broken(scenario, truth, rng):
        calls.append(1)
        raise ConfigError('not positive definite', 'simulation')

    monkeypatch.setattr(study, 'gen_dataset', broken)
    with pytest.raises(ConfigError):
        study.run_replication(_small_scenario(), 0)
    assert len(calls) == 1


def test_large_ao_bias_is_a_warning(monkeypatch, caplog):
    monkeypatch.setattr(study, 'realized_bias', lambda *args: 100.0)
    scenario = _small_scenario(replications=1, methods=('CHIMA',))
    truth = gen_coefficients(scenario, replication_rng(scenario.seed, 0))
    result = SimpleNamespace(candidates=truth.active_set, context=None)
    monkeypatch.setattr(study, 'ao_projection', lambda *args: None)
    with caplog.at_level(logging.WARNING, logger='mediation'):
        study._log_bias(truth, result, 0)
    warnings = [r for r in caplog.records if r.levelno == logging.WARNING]
    assert len(warnings) == len(truth.active_set)
    assert 'AO bias' in warnings[0].getMessage()


def test_replication_gives_up_after_repeated_failures(monkeypatch):
    def broken(*args):
        raise SingularGramError('singular', 'screening')

    monkeypatch.setattr(study, '_run_methods', broken)
    with pytest.raises(NumericalError, match='replication 0'):
        run_study(_small_scenario(n=10, p=8, replications=1))


def test_structures_dict():
    assert set(structures_dict) == {'cs', 'toeplitz', 'factor'}
    assert structures_dict['toeplitz'](0.85).label() == 'Toeplitz(0.85)'


SCENARIOS = Path(__file__).resolve().parents[1] / 'scenarios'

# Cell file stem, then the published RHOLP screening rate and CHIMA power
# (None where no power figure is checked).
GRID = [
    ('cs_rho085_s4_p8000', 0.9905, None),
    ('cs_rho085_s6_p8000', 0.9893, None),
    ('toeplitz_rho085_s4_p8000', 0.9990, None),
    ('toeplitz_rho085_s6_p8000', 0.9983, None),
    ('toeplitz_rho-085_s4_p8000', 0.9835, None),
    ('toeplitz_rho-085_s6_p8000', 0.9773, None),
    ('factor_r2_s4_p8000', 0.9590, 0.9165),
    ('factor_r2_s6_p8000', 0.9557, 0.9080),
    ('factor_r4_s4_p8000', 0.9455, 0.8920),
    ('factor_r4_s6_p8000', 0.9470, 0.8850),
]


def test_shipped_scenarios_parse():
    paths = sorted(SCENARIOS.glob('*.txt'))
    assert len(paths) == 20
    for path in paths:
        scenario = files.read_scenario(path)
        assert (scenario.n, scenario.replications, scenario.seed) == (400, 100, 2024)
        assert scenario.p in (6000, 8000) and scenario.s11 in (4, 6)
        assert path.stem.endswith(f'_s{scenario.s11}_p{scenario.p}')
    assert {stem for stem, _, _ in GRID} <= {path.stem for path in paths}


@pytest.mark.slow
@pytest.mark.parametrize('stem,screening_rate,power', GRID)
def test_published_grid(stem, screening_rate, power):
    scenario = files.read_scenario(SCENARIOS / f'{stem}.txt')
    result = run_study(scenario, workers=4)
    chima = result.means('CHIMA')
    assert chima['screening_rate'] == pytest.approx(screening_rate, abs=0.05)
    assert chima['fdp'] <= 0.10
    if power is not None:
        assert chima['power'] == pytest.approx(power, abs=0.07)
    alpha_sis = result.means('alpha_sis_screen_only')
    if scenario.structure == 'factor' or scenario.rho < 0:
        assert chima['screening_rate'] > alpha_sis['screening_rate']
    if scenario.structure == 'cs' and scenario.s11 == 4:
        for method in result.methods():
            assert result.means(method)['screening_rate'] >= 0.95
