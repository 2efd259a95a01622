"""
Runtime checks of the Python interpreter and the numerical stack.
Functions:
minversion() - Exit program if not minimum required Python version.
stack_versions() - Versions of the installed numerical packages.
"""

import sys
from importlib import metadata

STACK = ('numpy', 'scipy', 'pandas')


def minversion(req_version: str) -> None:
    """
    Exit with status 1 when the interpreter is older than *req_version*.

    :param req_version: Minimum major.minor version, e.g. '3.8'.
    """
    required = tuple(int(part) for part in req_version.split('.'))
    running = sys.version_info[:2]
    if running < required:
        sys.stderr.write(f'{__package__} needs Python {req_version} or later;'
                         f' this is Python {running[0]}.{running[1]}.\n'
                         'Python downloads are available from https://www.python.org/\n')
        sys.exit(1)


def stack_versions() -> dict:
    """
    Installed versions of the packages the computations depend on.

    :return: Package name to version string, 'missing' when not installed.
    """
    versions = {}
    for package in STACK:
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = 'missing'
    return versions
