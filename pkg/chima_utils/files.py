"""
File controller for chima.py. Reads input CSVs, column maps and scenario
files; writes and reads discovery reports.
"""
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from mediation.core_model import Dataset, make_dataset
from mediation.errors import ConfigError, ParseError, ScenarioError
from mediation.output import create_summary_data, create_tsv_data, write_file
from mediation.simulation.generators import SimScenario
from . import config as cfg

MODULE = 'cli_io'

# Tokens that parse to a non-finite number rather than failing.
NON_FINITE_TOKENS = {'nan', '+nan', '-nan', 'inf', '+inf', '-inf',
                     'infinity', '+infinity', '-infinity'}


def _read_table(path: Path) -> pd.DataFrame:
    """Header row plus string cells; line numbers match the file."""
    try:
        table = pd.read_csv(path, header=None, dtype=str, keep_default_na=False,
                            skip_blank_lines=True, encoding='utf-8')
    except pd.errors.EmptyDataError as err:
        raise ParseError(f'{path} is empty', line=1, module=MODULE) from err
    except pd.errors.ParserError as err:
        found = re.search(r'line (\d+)', str(err))
        line = int(found.group(1)) if found else None
        raise ParseError(f'{path}: malformed CSV ({err})', line=line, module=MODULE) from err
    except UnicodeDecodeError as err:
        raise ParseError(f'{path} is not UTF-8 text', module=MODULE) from err
    if table.shape[0] < 2:
        raise ParseError(f'{path} has a header but no data rows', line=2, module=MODULE)
    return table


def _numeric(table: pd.DataFrame, path: Path) -> Tuple[List[str], np.ndarray]:
    """Column names and the float body of a table read by _read_table()."""
    names = [str(name).strip() for name in table.iloc[0]]
    body = table.iloc[1:].apply(lambda col: col.str.strip())
    values = body.apply(pd.to_numeric, errors='coerce')
    failed = values.isna() & ~body.apply(lambda col: col.str.lower().isin(NON_FINITE_TOKENS))
    if failed.to_numpy().any():
        row, column = np.argwhere(failed.to_numpy())[0]
        # File line numbers are 1-based and the header is line 1.
        raise ParseError(f'{path}: column "{names[column]}" value '
                         f'"{body.iat[row, column]}" is not a number',
                         line=int(row) + 2, module=MODULE)
    return names, values.to_numpy(dtype=float)


def read_numeric_csv(path: Union[str, Path]) -> Tuple[List[str], np.ndarray]:
    """
    Read a comma-separated file with a header row and a numeric body.

    :param path: The CSV file.
    :return: The header names and the n x columns float matrix.
    """
    path = Path(path)
    return _numeric(_read_table(path), path)


def _single_column(path: Path, what: str) -> np.ndarray:
    names, values = read_numeric_csv(path)
    if values.shape[1] != 1:
        raise ParseError(f'{what} file {path} must hold one column, found {len(names)}',
                         line=1, module=MODULE)
    return values[:, 0]


def read_column_map(path: Union[str, Path]) -> Dict[str, str]:
    """
    Read 'column=role' lines; '#' starts a comment.

    :param path: The column-map sidecar of a combined CSV.
    :return: Column name to role.
    """
    roles = {}
    for number, line in enumerate(Path(path).read_text(encoding='utf-8').splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        column, sep, role = (part.strip() for part in line.partition('='))
        if not sep or not column or role not in cfg.ROLES:
            raise ParseError(f'{path}: expected "column=role" with role in '
                             f'{", ".join(cfg.ROLES)}, got "{line}"', line=number, module=MODULE)
        if column in roles:
            raise ParseError(f'{path}: column "{column}" mapped twice', line=number, module=MODULE)
        roles[column] = role
    return roles


def _load_combined(combined: Path, column_map: Path) -> Dataset:
    roles = read_column_map(column_map)
    table = _read_table(combined)
    header = [str(name).strip() for name in table.iloc[0]]
    unknown = sorted(set(roles) - set(header))
    if unknown:
        raise ParseError(f'{column_map} names column(s) missing from {combined}: '
                         f'{", ".join(unknown)}', module=MODULE)
    for role in ('exposure', 'outcome'):
        tagged = [name for name in header if roles.get(name) == role]
        if len(tagged) != 1:
            raise ParseError(f'{column_map} must tag exactly one {role} column, '
                             f'found {len(tagged)}', module=MODULE)
    # Unmapped columns are mediators.
    keep = [i for i, name in enumerate(header) if roles.get(name) != 'ignore']
    names, values = _numeric(table.iloc[:, keep], combined)

    def columns(role):
        return [i for i, name in enumerate(names) if roles.get(name, 'mediator') == role]

    mediator_columns = columns('mediator')
    if not mediator_columns:
        raise ParseError(f'{combined} has no mediator columns', line=1, module=MODULE)
    covariate_columns = columns('covariate')
    return make_dataset(
        exposure=values[:, columns('exposure')[0]],
        mediators=values[:, mediator_columns],
        outcome=values[:, columns('outcome')[0]],
        covariates=values[:, covariate_columns] if covariate_columns else None,
        mediator_names=[names[i] for i in mediator_columns])


def load_dataset(config: cfg.AnalyzeConfig) -> Dataset:
    """
    Read and validate the analysis inputs. Rows are matched by position
    across files; mediator names come from the mediator CSV header.

    :param config: AnalyzeConfig naming the input files.
    :return: The validated Dataset.
    """
    if config.combined is not None:
        return _load_combined(Path(config.combined), Path(config.column_map))
    exposure = _single_column(Path(config.exposure), 'exposure')
    outcome = _single_column(Path(config.outcome), 'outcome')
    names, mediators = read_numeric_csv(config.mediators)
    covariates = None
    if config.covariates is not None:
        _, covariates = read_numeric_csv(config.covariates)
    return make_dataset(exposure, mediators, outcome, covariates, mediator_names=names)


# Scenario keys and their value parsers.
def _flag(text: str) -> bool:
    lowered = text.lower()
    if lowered not in ('true', 'false', '1', '0', 'yes', 'no'):
        raise ValueError(f'"{text}" is not a boolean')
    return lowered in ('true', '1', 'yes')


def _methods(text: str) -> Tuple[str, ...]:
    return tuple(item.strip() for item in text.split(',') if item.strip())


SCENARIO_KEYS = {
    'n': int, 'p': int, 's11': int, 'structure': str, 'rho': float, 'r': int,
    'tau': float, 'coef_low': float, 'coef_high': float, 'gamma': float,
    'x_variance': float, 'x_scale': str, 'eps_variance': float,
    'replications': int, 'alpha_level': float, 'seed': int, 'methods': _methods,
    'k': float, 'delta': float, 'lambda': float, 'd': int, 'd_baseline': int,
    'standardize': _flag,
}


def parse_scenario(text: str, source: str = '<scenario>') -> SimScenario:
    """
    Build a SimScenario from key=value lines.

    :param text: The scenario text; '#' starts a comment.
    :param source: Name used in error messages.
    :return: The validated SimScenario.
    """
    values = {}
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, raw = (part.strip() for part in line.partition('='))
        if not sep:
            raise ScenarioError(f'{source} line {number}: expected key=value, got "{line}"',
                                MODULE)
        if key not in SCENARIO_KEYS:
            raise ScenarioError(f'{source} line {number}: unknown key "{key}"', MODULE)
        if key in values:
            raise ScenarioError(f'{source} line {number}: key "{key}" given twice', MODULE)
        try:
            values[key] = SCENARIO_KEYS[key](raw)
        except ValueError as err:
            raise ScenarioError(f'{source} line {number}: bad value for {key}: {err}',
                                MODULE) from err

    if 'coef_low' in values or 'coef_high' in values:
        low, high = SimScenario.coef_range
        values['coef_range'] = (values.pop('coef_low', low), values.pop('coef_high', high))
    if 'lambda' in values:
        values['lam'] = values.pop('lambda')
    try:
        return SimScenario(**values)
    except ConfigError as err:
        raise ScenarioError(f'{source}: {err.message}', MODULE) from err


def read_scenario(path: Union[str, Path]) -> SimScenario:
    """Parse a scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as err:
        raise ScenarioError(f'cannot read scenario file {path} ({err.strerror})', MODULE) from err
    return parse_scenario(text, str(path))


def write_report(report, out_dir: Union[str, Path]) -> Tuple[Path, Path]:
    """
    Write a DiscoveryReport as the TSV table plus the key=value summary.

    :param report: The DiscoveryReport.
    :param out_dir: Output folder.
    :return: Paths of the TSV and the summary files.
    """
    out_dir = Path(out_dir)
    table = write_file(create_tsv_data(cfg.REPORT_COLUMNS, report.table_rows()),
                       out_dir / cfg.REPORT_FILE)
    summary = write_file(create_summary_data(report.header), out_dir / cfg.SUMMARY_FILE)
    return table, summary


def read_summary(path: Union[str, Path]) -> Dict[str, str]:
    """Key to raw value of a key=value summary file."""
    summary = {}
    for line in Path(path).read_text(encoding='utf-8').splitlines():
        key, sep, value = line.partition('=')
        if sep:
            summary[key.strip()] = value.strip()
    return summary


def read_report_table(path: Union[str, Path]) -> pd.DataFrame:
    """
    Read a discoveries TSV.

    :param path: The TSV, or the folder holding it.
    :return: One row per candidate with typed columns.
    """
    path = Path(path)
    if path.is_dir():
        path = path / cfg.REPORT_FILE
    try:
        table = pd.read_csv(path, sep='\t', dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise ParseError(f'cannot read report {path} ({err})', module=MODULE) from err
    if tuple(table.columns) != cfg.REPORT_COLUMNS:
        raise ParseError(f'{path} is not a discovery report; columns are '
                         f'{", ".join(table.columns)}', line=1, module=MODULE)
    numeric = list(cfg.REPORT_COLUMNS[1:-1])
    try:
        table[numeric] = table[numeric].astype(float)
    except ValueError as err:
        raise ParseError(f'{path}: non-numeric report value ({err})', module=MODULE) from err
    flags = table['significant'].str.lower()
    if not flags.isin(['true', 'false']).all():
        raise ParseError(f'{path}: significant must be true or false', module=MODULE)
    table['significant'] = flags == 'true'
    return table


def summary_path_for(report_path: Union[str, Path]) -> Optional[Path]:
    """The summary next to a report, if there is one."""
    report_path = Path(report_path)
    folder = report_path if report_path.is_dir() else report_path.parent
    summary = folder / cfg.SUMMARY_FILE
    return summary if summary.is_file() else None
