#!/usr/bin/env python3
"""
chima.py is a command-line program for correlation-aware high-dimensional
mediation analysis: which of many correlated mediators M_j carry the
effect of an exposure X on an outcome Y.

Mediators are screened with Ridge-HOLP, each candidate is tested for the
exposure-mediator path by marginal least squares and for the
mediator-outcome path by approximate orthogonalization, and the joint
significance p-values are thresholded under composite-null FDR control.
A simulation command reproduces Monte-Carlo studies of the procedure and
a compare command reports the overlap of two discovery lists.

    This program is free software: you can redistribute it and/or modify
    it under the terms of the GNU General Public License as published by
    the Free Software Foundation, either version 3 of the License, or
    (at your option) any later version.

    This program is distributed in the hope that it will be useful,
    but WITHOUT ANY WARRANTY; without even the implied warranty of
    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
    See the GNU General Public License for more details.

    You should have received a copy of the GNU General Public License
    along with this program. If not, see https://www.gnu.org/licenses/.
"""

import argparse
import logging
import sys
import time
from dataclasses import replace
from datetime import datetime
from pathlib import Path
from sys import exit as sys_exit

from chima_utils import about, files, reporting, config as cfg
from mediation import run_chima, config as mcfg
from mediation.errors import MediationError
from mediation.output import console, create_summary_data, create_tsv_data, write_file, Level
from mediation.simulation import run_study
from mediation.simulation.study import REPLICATION_HEADER, TABLE_HEADER

ReportIt = reporting.report_results


class ChimaParser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(cfg.EXIT_USAGE, f'{self.prog}: error: {message}\n')


def analyze(args) -> int:
    """
    Screen, test and select mediators of one dataset; write the report.

    :param args: Parsed analyze arguments.
    :return: Exit status.
    """
    config = cfg.AnalyzeConfig(
        exposure=args.exposure, mediators=args.mediators, outcome=args.outcome,
        covariates=args.covariates, combined=args.combined, column_map=args.column_map,
        k=args.k, delta=args.delta, d=args.d, lam=args.lam, alpha_level=args.alpha,
        standardize=args.standardize, intercept=args.intercept, threads=args.threads,
        out=args.out)
    ReportIt(config.out, f'ANALYZE    TIME: {datetime.now().strftime("%x %X")}')

    start = time.perf_counter()
    dataset = files.load_dataset(config)
    ReportIt(config.out, f'Loaded n={dataset.n} samples, p={dataset.p} mediators,'
                         f' q={dataset.q} covariates')
    result = run_chima(dataset, config.rholp(), config.ao(), lam=config.lam,
                       alpha_level=config.alpha_level, intercept=config.intercept,
                       workers=config.threads)
    report = reporting.build_report(dataset, result, time.perf_counter() - start)
    table, summary = files.write_report(report, config.out)

    pi00, pi01, pi10 = result.fdr.proportions
    ReportIt(config.out,
             f'Screened {len(result.candidates)} candidates;'
             f' pi00={pi00:.3g} pi01={pi01:.3g} pi10={pi10:.3g};'
             f' t_hat={result.fdr.t_hat:.4g}')
    names = ', '.join(report.significant()) or 'none'
    ReportIt(config.out, f'{cfg.BLUE}{len(result.discoveries)} significant mediator(s):'
                         f'{cfg.NC} {names}')
    ReportIt(config.out, f'Results were written to {table} and {summary}')
    return cfg.EXIT_OK


def simulate(args) -> int:
    """
    Run the Monte-Carlo study described by a scenario file.

    :param args: Parsed simulate arguments.
    :return: Exit status.
    """
    scenario = files.read_scenario(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    if args.replications is not None:
        scenario = replace(scenario, replications=args.replications)
    ReportIt(args.out, f'SIMULATE {args.scenario}    TIME: {datetime.now().strftime("%x %X")}')

    result = run_study(scenario, workers=args.threads)
    table = write_file(create_tsv_data(TABLE_HEADER, result.table_rows()),
                       Path(args.out) / cfg.TABLE_FILE)
    write_file(create_tsv_data(REPLICATION_HEADER, result.replication_rows()),
               Path(args.out) / cfg.REPLICATIONS_FILE)

    for method in result.methods():
        means = ' '.join(f'{metric}={mean:.4f}' for metric, mean in result.means(method).items())
        ReportIt(args.out, f'{cfg.YELLOW}{method.ljust(24)}{cfg.NC}{means}')
    ReportIt(args.out, f'{result.redraws} redraw(s); table written to {table}')
    return cfg.EXIT_OK


def compare(args) -> int:
    """
    Report the overlap of the significant mediators of two reports.

    :param args: Parsed compare arguments.
    :return: Exit status.
    """
    overlap = reporting.compare_discovery_sets(reporting.read_report(args.report_a),
                                               reporting.read_report(args.report_b))
    summary = reporting.overlap_summary(overlap, labels=args.labels)
    path = write_file(create_summary_data(summary), Path(args.out) / cfg.OVERLAP_FILE)
    only_a, only_b, both = overlap.counts()
    label_a, label_b = args.labels
    ReportIt(args.out, f'only {label_a}: {only_a}    only {label_b}: {only_b}    both: {both}')
    ReportIt(args.out, f'Overlap written to {path}')
    return cfg.EXIT_OK


def manage_args(argv=None) -> argparse.Namespace:
    """Allow handling of command line arguments.

    :param argv: Optional argument list; sys.argv[1:] when None.
    :return: The parsed arguments.
    """
    parser = ChimaParser(prog=cfg.PROGRAM)

    parser.add_argument('--info', '-i',
                        help='Provides description, version, GNU license.',
                        action='store_true',
                        default=False)
    parser.add_argument('--use', '-u',
                        help='Usage, command examples.',
                        action='store_true',
                        default=False)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', '-v', action='store_true',
                           help='Log debug messages.')
    verbosity.add_argument('--quiet', '-q', action='store_true',
                           help='Log warnings and errors only.')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')

    run = commands.add_parser('analyze', help='Find mediators in a dataset.')
    run.add_argument('--exposure', type=Path, help='CSV with the exposure column.')
    run.add_argument('--mediators', type=Path, help='CSV with one column per mediator.')
    run.add_argument('--outcome', type=Path, help='CSV with the outcome column.')
    run.add_argument('--covariates', type=Path, help='Optional CSV of covariates.')
    run.add_argument('--combined', type=Path, help='One CSV holding every column.')
    run.add_argument('--column-map', type=Path, dest='column_map',
                     help='column=role lines for --combined.')
    run.add_argument('--k', type=float, default=mcfg.RIDGE_K,
                     help='Ridge constant of the screening (default: %(default)g).')
    run.add_argument('--delta', type=float, default=mcfg.AO_DELTA,
                     help='Projection regularization (default: %(default)g).')
    run.add_argument('--d', type=int, default=None,
                     help='Candidate count (default: ceil(n / log n)).')
    run.add_argument('--lambda', type=float, default=mcfg.NULL_LAMBDA, dest='lam',
                     help='Null-proportion tuning constant (default: %(default)g).')
    run.add_argument('--alpha', type=float, default=mcfg.ALPHA_LEVEL,
                     help='Target FDR (default: %(default)g).')
    run.add_argument('--standardize', action='store_true', dest='standardize',
                     help='Scale design columns to unit variance for screening (default).')
    run.add_argument('--no-standardize', action='store_false', dest='standardize',
                     help='Screen on the raw column scales.')
    run.add_argument('--intercept', action='store_true', dest='intercept',
                     help='Fit intercepts in every model (default).')
    run.add_argument('--no-intercept', action='store_false', dest='intercept',
                     help='Fit every model through the origin; for pre-centered data.')
    run.add_argument('--seed', type=int, default=None,
                     help='Accepted for symmetry with simulate; analyze draws no random numbers.')
    run.add_argument('--threads', type=int, default=1,
                     help='Threads for the per-candidate tests (default: %(default)d).')
    run.add_argument('--out', type=Path, default=cfg.OUTPUT_DIR,
                     help='Output folder (default: %(default)s).')
    run.set_defaults(handler=analyze, standardize=True, intercept=True)

    sim = commands.add_parser('simulate', help='Run a simulation scenario file.')
    sim.add_argument('scenario', type=Path, help='key=value scenario file.')
    sim.add_argument('--seed', type=int, default=None, help='Overrides the scenario seed.')
    sim.add_argument('--replications', type=int, default=None,
                     help='Overrides the scenario replication count.')
    sim.add_argument('--threads', type=int, default=1,
                     help='Worker processes (default: %(default)d).')
    sim.add_argument('--out', type=Path, default=cfg.OUTPUT_DIR,
                     help='Output folder (default: %(default)s).')
    sim.set_defaults(handler=simulate)

    cmp = commands.add_parser('compare', help='Overlap of two discovery reports.')
    cmp.add_argument('report_a', type=Path, help='First discoveries.tsv or its folder.')
    cmp.add_argument('report_b', type=Path, help='Second discoveries.tsv or its folder.')
    cmp.add_argument('--labels', nargs=2, default=('A', 'B'), metavar=('A', 'B'),
                     help='Names of the two reports.')
    cmp.add_argument('--out', type=Path, default=cfg.OUTPUT_DIR,
                     help='Output folder (default: %(default)s).')
    cmp.set_defaults(handler=compare)

    args = parser.parse_args(argv)
    # --info and --use will print, then exit.
    if args.info:
        about.info(__doc__)
    elif args.use:
        about.usage()
    elif args.command is None:
        parser.error('a command is required: analyze, simulate or compare')
    if getattr(args, 'threads', 1) < 1:
        parser.error('--threads must be >= 1')
    return args


def main(argv=None) -> int:
    """
    Parse arguments; print and exit for informational args.
    Configure logging, run the command and map errors to exit statuses.

    :param argv: Optional argument list.
    :return: Exit status.
    """
    args = manage_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(stream=sys.stderr, format='%(levelname)s %(message)s')
    logging.getLogger('mediation').setLevel(level)

    try:
        return args.handler(args)
    except MediationError as err:
        console(str(err), level=Level.error)
        return err.exit_code


def _entry() -> None:
    try:
        sys_exit(main())
    except (EOFError, KeyboardInterrupt):
        print(' *** Keyboard interrupt: User has quit the program ***\n', file=sys.stderr)
        sys_exit()


if __name__ == "__main__":
    _entry()
