"""
Program, build environment and usage information for the --info and
--use flags.
"""
import platform
from pathlib import Path
from sys import exit as sys_exit

from . import __author__, __copyright__, __version__, vcheck, config as cfg


def _about_fields() -> dict:
    """Label to value, in print order."""
    stack = vcheck.stack_versions()
    return {
        'Author': __author__,
        'License': 'GNU General Public License v3',
        'Copyright': __copyright__,
        'Program': cfg.PROGRAM,
        'Version': __version__,
        'Python': platform.python_version(),
        'Stack': ', '.join(f'{name} {version}' for name, version in stack.items()),
        'Status': 'Development Status :: 3 - Alpha',
    }


def info(main_doc: str) -> None:
    """
    Print the chima.py docstring and the program fields, then exit.

    :param main_doc: The __doc__ docstring from the main script.
    """
    print(main_doc)
    for label, value in _about_fields().items():
        print(f'{label + ":":<10} {value}')
    print()
    sys_exit(0)


def usage():
    """
    Print the command summary and the examples of use_syntax.txt, then exit.
    """
    print(f'{cfg.ORANGE}USAGE: {cfg.PROGRAM} analyze|simulate|compare [options]\n'
          f'       Add -h after a command for its options.{cfg.NC}\n')
    syntax_file = Path(__file__).with_name('use_syntax.txt')
    if syntax_file.is_file():
        print(syntax_file.read_text(encoding='utf-8'))
    else:
        print(f'Sorry, but could not find file: {syntax_file}')
    sys_exit(0)
