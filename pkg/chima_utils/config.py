"""
Configuration file for chima.py
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from mediation import config as mcfg
from mediation.ao_inference import AoConfig
from mediation.errors import ConfigError
from mediation.screening import RholpConfig

PROGRAM = 'chima.py'

# Exit status contract of the command line.
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

# Output files, written under the --out directory.
OUTPUT_DIR = Path('chima_out')
REPORT_FILE = 'discoveries.tsv'
SUMMARY_FILE = 'summary.txt'
LOG_FILE = 'run.log'
TABLE_FILE = 'simulation.tsv'
REPLICATIONS_FILE = 'replications.tsv'
OVERLAP_FILE = 'overlap.txt'

REPORT_COLUMNS = ('mediator', 'alpha_hat', 'se_alpha', 'p_alpha',
                  'beta_hat', 'se_beta', 'p_beta', 'p_max', 'significant')

# Roles of the columns of a combined CSV, as named in its column map.
ROLES = ('exposure', 'outcome', 'mediator', 'covariate', 'ignore')

# Summary key whose value changes between otherwise identical runs.
TIMING_KEY = 'wall_clock_seconds'

# Terminal output ANSI foreground colors.
BLUE = '\x1b[1;38;5;33m'
ORANGE = '\x1b[1;38;5;166m'
YELLOW = '\x1b[1;38;5;208m'
NC = '\x1b[0m'  # No color, reset to system default.


@dataclass(frozen=True)
class AnalyzeConfig:
    """Inputs and tuning of one analyze run."""
    exposure: Optional[Path] = None
    mediators: Optional[Path] = None
    outcome: Optional[Path] = None
    covariates: Optional[Path] = None
    combined: Optional[Path] = None
    column_map: Optional[Path] = None
    k: float = mcfg.RIDGE_K
    delta: float = mcfg.AO_DELTA
    d: Optional[int] = None
    lam: float = mcfg.NULL_LAMBDA
    alpha_level: float = mcfg.ALPHA_LEVEL
    standardize: bool = True
    intercept: bool = True
    threads: int = 1
    out: Path = OUTPUT_DIR

    def __post_init__(self):
        if not 0 < self.alpha_level < 1:
            raise ConfigError(f'alpha={self.alpha_level} outside (0, 1)', 'cli_io')
        if not 0 < self.lam < 1:
            raise ConfigError(f'lambda={self.lam} outside (0, 1)', 'cli_io')
        if self.threads < 1:
            raise ConfigError(f'threads={self.threads} must be >= 1', 'cli_io')
        if self.combined is None:
            if None in (self.exposure, self.mediators, self.outcome):
                raise ConfigError('give --exposure, --mediators and --outcome, '
                                  'or --combined with --column-map', 'cli_io')
        elif self.column_map is None:
            raise ConfigError('--combined needs --column-map', 'cli_io')
        for path in self.inputs():
            if not Path(path).is_file():
                raise ConfigError(f'input file not found: {path}', 'cli_io')

    def inputs(self):
        """Returns the input paths that were given."""
        paths = (self.exposure, self.mediators, self.outcome, self.covariates,
                 self.combined, self.column_map)
        return [Path(path) for path in paths if path is not None]

    def rholp(self) -> RholpConfig:
        return RholpConfig(k=self.k, d=self.d, standardize=self.standardize)

    def ao(self) -> AoConfig:
        return AoConfig(delta=self.delta)
