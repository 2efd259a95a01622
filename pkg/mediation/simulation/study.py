from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from mediation import config as cfg
from mediation.ao_inference import AoConfig, ao_projection, realized_bias
from mediation.core_model import ModelTruth
from mediation.errors import DataError, NumericalError
from mediation.output import console, Level
from mediation.pipeline import run_chima
from mediation.screening import RholpConfig, baseline_screen
from mediation.simulation.generators import (SimScenario, gen_coefficients, gen_dataset,
                                             replication_rng)

MODULE = 'simulation'

METRICS = ('screening_rate', 'power', 'fdp')
SCREEN_ONLY = {
    'alpha_sis_screen_only': 'alpha_sis',
    'product_sis_screen_only': 'product_sis',
}
TABLE_HEADER = ('structure', 's11', 'method', 'metric', 'mean', 'replications')
REPLICATION_HEADER = ('replication', 'attempt', 'method', 'captured', 'true_pos',
                      'false_pos', 'discoveries', 'screening_rate', 'power', 'fdp')


def evaluate_replication(truth: ModelTruth, candidates: Iterable[int],
                         discoveries: Iterable[int]) -> Tuple[int, int, int]:
    """
    Counts against the true active set.

    :return: (captured, true_pos, false_pos)
    """
    active = set(truth.active_set)
    discoveries = set(discoveries)
    captured = len(active.intersection(candidates))
    true_pos = len(active & discoveries)
    return captured, true_pos, len(discoveries - active)


@dataclass(frozen=True)
class ReplicationRecord:
    """Raw counts of one method on one replication."""
    replication: int
    attempt: int
    method: str
    s11: int
    captured: int
    true_pos: Optional[int] = None
    false_pos: Optional[int] = None

    @property
    def discoveries(self) -> Optional[int]:
        if self.true_pos is None:
            return None
        return self.true_pos + self.false_pos

    @property
    def screening_rate(self) -> float:
        return self.captured / self.s11

    @property
    def power(self) -> Optional[float]:
        return None if self.true_pos is None else self.true_pos / self.s11

    @property
    def fdp(self) -> Optional[float]:
        if self.false_pos is None:
            return None
        return self.false_pos / max(1, self.discoveries)

    def row(self) -> tuple:
        return (self.replication, self.attempt, self.method, self.captured,
                self._blank(self.true_pos), self._blank(self.false_pos),
                self._blank(self.discoveries), self.screening_rate,
                self._blank(self.power), self._blank(self.fdp))

    @staticmethod
    def _blank(value):
        return 'NA' if value is None else value


@dataclass
class SimResult:
    """Per-replication records of a study and their per-method means."""
    scenario: SimScenario
    records: List[ReplicationRecord] = field(default_factory=list)
    redraws: int = 0

    def methods(self) -> List[str]:
        return [m for m in self.scenario.methods if any(r.method == m for r in self.records)]

    def means(self, method: str) -> Dict[str, float]:
        """Average of every metric the method reports."""
        records = [r for r in self.records if r.method == method]
        means = {}
        for metric in METRICS:
            values = [getattr(r, metric) for r in records]
            if values and values[0] is not None:
                means[metric] = float(np.mean(values))
        return means

    def table_rows(self) -> List[tuple]:
        """(structure, s11, method, metric, mean, replications) rows."""
        label = self.scenario.errors.label()
        rows = []
        for method in self.methods():
            for metric, mean in self.means(method).items():
                rows.append((label, self.scenario.s11, method, metric, mean,
                             self.scenario.replications))
        return rows

    def replication_rows(self) -> List[tuple]:
        return [record.row() for record in self.records]


def _log_bias(truth: ModelTruth, result, replication: int) -> None:
    # Realized AO bias of the active candidates against half the signal.
    for j in truth.active_set:
        if j not in result.candidates:
            continue
        bias = realized_bias(result.context, j, ao_projection(result.context, j),
                             truth.beta)
        if abs(bias) >= abs(truth.beta[j]) / 2:
            console(f'replication {replication}: AO bias {bias:.3g} on mediator {j} '
                    f'exceeds half of beta = {truth.beta[j]:.3g}', level=Level.warning)


def _run_methods(scenario: SimScenario, truth: ModelTruth, dataset,
                 replication: int, attempt: int) -> List[ReplicationRecord]:
    records = []
    for method in scenario.methods:
        if method == 'CHIMA':
            rholp = RholpConfig(k=scenario.k, d=scenario.d, standardize=scenario.standardize)
            result = run_chima(dataset, rholp, AoConfig(delta=scenario.delta),
                               lam=scenario.lam, alpha_level=scenario.alpha_level)
            _log_bias(truth, result, replication)
            captured, true_pos, false_pos = evaluate_replication(
                truth, result.candidates, result.discoveries)
            records.append(ReplicationRecord(replication, attempt, method, truth.s11,
                                             captured, true_pos, false_pos))
        else:
            d = min(scenario.d_baseline or cfg.baseline_screen_size(scenario.n), scenario.p)
            candidates = baseline_screen(dataset, SCREEN_ONLY[method], d)
            captured, _, _ = evaluate_replication(truth, candidates, ())
            records.append(ReplicationRecord(replication, attempt, method, truth.s11, captured))
    return records


def run_replication(scenario: SimScenario, replication: int) -> Tuple[List[ReplicationRecord], int]:
    """
    Simulates one dataset and applies every method to it. A replication
    that fails numerically is redrawn from the next attempt's substream.

    :return: the records and the number of redraws
    """
    error = None
    for attempt in range(cfg.SIM_MAX_REDRAWS + 1):
        rng = replication_rng(scenario.seed, replication, attempt)
        try:
            truth = gen_coefficients(scenario, rng)
            dataset, truth = gen_dataset(scenario, truth, rng)
            return _run_methods(scenario, truth, dataset, replication, attempt), attempt
        except (DataError, NumericalError) as err:
            error = err
            console(f'replication {replication} attempt {attempt} failed: {err}; redrawing',
                    level=Level.warning)
    raise NumericalError(f'replication {replication} failed {cfg.SIM_MAX_REDRAWS + 1} times; '
                         f'last error: {error}', MODULE)


def run_study(scenario: SimScenario, methods: Sequence[str] = None,
              workers: int = 1) -> SimResult:
    """
    Runs all replications of a scenario.

    :param scenario: the SimScenario
    :param methods: optional, subset of the scenario's methods
    :param workers: processes; results do not depend on it
    :returns SimResult
    """
    if methods is not None:
        scenario = replace(scenario, methods=tuple(methods))
    job = partial(run_replication, scenario)
    replications = range(scenario.replications)
    console(f'Running {scenario.replications} replication(s) of {scenario.errors.label()}, '
            f's11={scenario.s11}, p={scenario.p}', level=Level.info)
    if workers <= 1:
        outcomes = map(job, replications)
        return _collect(scenario, outcomes)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return _collect(scenario, pool.map(job, replications))


def _collect(scenario, outcomes) -> SimResult:
    result = SimResult(scenario)
    for records, redraws in outcomes:
        result.records.extend(records)
        result.redraws += redraws
    if result.redraws:
        console(f'{result.redraws} replication redraw(s)', level=Level.warning)
    return result

