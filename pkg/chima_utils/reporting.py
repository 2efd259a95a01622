#!/usr/bin/env python3
"""
Combined result reporting for clean terminal/console printing and
writing to file, and the discovery report of an analyze run.
"""
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Union

from mediation.core_model import Dataset
from mediation.errors import ParseError
from mediation.pipeline import ChimaResult
from . import files, config as cfg

ANSI_ESC = re.compile(r'\x1B(?:[@-Z\\-_]|\[[0-?]*[ -/]*[@-~])')


def report_results(out_dir: Union[str, Path], message: str) -> None:
    """
    Output messages to Terminal and to the run log.

    :param out_dir: Output folder of the current run; holds run.log.
    :param message: Message string to be printed and written.
    """
    print(message, file=sys.stderr)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    # Need to remove escape codes for text written to file.
    with open(out_dir / cfg.LOG_FILE, 'a', encoding='utf-8') as log:
        log.write(f'{ANSI_ESC.sub("", message)}\n')


class ReportRow(NamedTuple):
    mediator: str
    alpha_hat: float
    se_alpha: float
    p_alpha: float
    beta_hat: float
    se_beta: float
    p_beta: float
    p_max: float
    significant: bool


@dataclass
class DiscoveryReport:
    """Candidate rows sorted by p_max plus the run's header block."""
    rows: List[ReportRow] = field(default_factory=list)
    header: Dict[str, object] = field(default_factory=dict)

    def table_rows(self) -> List[tuple]:
        return [tuple(row) for row in self.rows]

    def significant(self) -> List[str]:
        """Names of the discoveries, in report order."""
        return [row.mediator for row in self.rows if row.significant]


def build_report(dataset: Dataset, result: ChimaResult, elapsed: float = None) -> DiscoveryReport:
    """
    Tabulate a pipeline result.

    :param dataset: The analysed Dataset; supplies mediator names.
    :param result: ChimaResult of run_chima().
    :param elapsed: Optional wall-clock seconds, kept in the header only.
    """
    t_hat = result.fdr.t_hat
    rows = [
        ReportRow(dataset.mediator_names[rec.index], rec.alpha_hat, rec.se_alpha, rec.p_alpha,
                  rec.beta_hat, rec.se_beta, rec.p_beta, rec.p_max, rec.p_max <= t_hat)
        for rec in result.records.by_p_max()
    ]
    pi00, pi01, pi10 = result.fdr.proportions
    header = {
        'n': dataset.n,
        'p': dataset.p,
        'q': dataset.q,
        'candidates': len(result.candidates),
        'pi00': pi00,
        'pi01': pi01,
        'pi10': pi10,
        'lambda': result.fdr.lam,
        'alpha_level': result.fdr.alpha_level,
        't_hat': t_hat,
        'discoveries': len(result.discoveries),
        'sigma_eps2': result.context.sigma_eps2,
    }
    if elapsed is not None:
        header[cfg.TIMING_KEY] = elapsed
    return DiscoveryReport(rows=rows, header=header)


def read_report(path: Union[str, Path]) -> DiscoveryReport:
    """
    Re-read a report written by files.write_report().

    :param path: The discoveries TSV, or its folder.
    """
    table = files.read_report_table(path)
    rows = [ReportRow(*record) for record in table.itertuples(index=False, name=None)]
    summary = files.summary_path_for(path)
    header = {}
    if summary is not None:
        for key, value in files.read_summary(summary).items():
            try:
                header[key] = int(value)
            except ValueError:
                try:
                    header[key] = float(value)
                except ValueError:
                    raise ParseError(f'{summary}: value of {key} is not a number',
                                     module='cli_io') from None
    return DiscoveryReport(rows=rows, header=header)


class Overlap(NamedTuple):
    only_a: List[str]
    only_b: List[str]
    both: List[str]

    def counts(self):
        """(only A, only B, both)"""
        return len(self.only_a), len(self.only_b), len(self.both)


def compare_discovery_sets(report_a: DiscoveryReport, report_b: DiscoveryReport) -> Overlap:
    """Set arithmetic on the names of the significant rows of two reports."""
    a, b = set(report_a.significant()), set(report_b.significant())
    return Overlap(only_a=sorted(a - b), only_b=sorted(b - a), both=sorted(a & b))


def overlap_summary(overlap: Overlap, labels=('A', 'B')) -> Dict[str, object]:
    """Counts and name lists of an Overlap as summary key/values."""
    only_a, only_b, both = overlap.counts()
    a, b = labels
    return {
        f'only_{a}': only_a,
        f'only_{b}': only_b,
        'both': both,
        f'only_{a}_names': ','.join(overlap.only_a),
        f'only_{b}_names': ','.join(overlap.only_b),
        'both_names': ','.join(overlap.both),
    }
