"""
Console logging and tab-separated/key=value formatting of results.
"""
import csv
import logging
import numbers
from collections import namedtuple
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

logger = logging.getLogger('mediation')

Level = namedtuple('Level', ['debug', 'info', 'warning', 'error'])(
    debug=logging.DEBUG,
    info=logging.INFO,
    warning=logging.WARNING,
    error=logging.ERROR
)

# Significant digits for floating values in written tables.
DIGITS = 6


def console(msg, level=None):
    """Emits a diagnostic line; data never go through here."""
    logger.log(level or Level.info, msg)


def fmt(value) -> str:
    """Formats one table cell."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, str):
        return value
    if isinstance(value, numbers.Integral):
        return str(int(value))
    return f'{float(value):.{DIGITS}g}'


def create_tsv_data(header: Sequence[str], rows: Iterable[Sequence]) -> list:
    """Formats a header and rows as a list of string rows."""
    data = [list(header)]
    for row in rows:
        data.append([fmt(cell) for cell in row])
    return data


def create_summary_data(summary: Mapping[str, object]) -> str:
    """Formats a flat key=value text block."""
    return ''.join(f'{key}={fmt(value)}\n' for key, value in summary.items())


def write_file(data: Union[list, str], path: Union[str, Path], encoding='utf-8') -> Path:
    """Writes rows as TSV, or text as-is, to *path*.

    :param data: list of string rows, or a text block.
    :param path: destination file; parent directories are created.
    :return: the path written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, 'w', encoding=encoding, newline='') as _f:
            if isinstance(data, list):
                writer = csv.writer(_f, delimiter='\t', lineterminator='\n')
                writer.writerows(data)
            else:
                _f.write(data)
        console(f'Output file: {path}', level=Level.debug)
    except IOError as err:
        console(str(err), level=Level.error)
        raise
    return path
