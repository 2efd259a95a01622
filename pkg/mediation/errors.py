"""
Exception hierarchy for the mediation package.
Every error carries the tag of the module that raised it and the exit
status the command-line front end reports for it.
"""


class MediationError(Exception):
    """Base class for all errors raised by the mediation package."""
    exit_code = 3

    def __init__(self, message: str, module: str = 'mediation'):
        super().__init__(message)
        self.message = message
        self.module = module

    def __str__(self):
        return f'[{self.module}] {self.message}'


class UsageError(MediationError):
    """Bad configuration or command-line usage."""
    exit_code = 1


class ConfigError(UsageError, ValueError):
    """A configuration value is out of its allowed range."""


class ScenarioError(UsageError, ValueError):
    """A simulation scenario file has an unknown key or a bad value."""


class DataError(MediationError):
    """Input data do not satisfy the Dataset contract."""
    exit_code = 2


class DimensionMismatchError(DataError, ValueError):
    """Row counts disagree among exposure, mediators, outcome, covariates."""


class NonFiniteError(DataError, ValueError):
    """A NaN or infinite value was found."""

    def __init__(self, message: str, row: int, column: int, module: str = 'core_model'):
        super().__init__(message, module)
        self.row = row
        self.column = column


class DuplicateNameError(DataError, ValueError):
    """Mediator identifiers are not unique."""


class TooFewSamplesError(DataError, ValueError):
    """Fewer than the minimum number of observations."""


class ConstantColumnError(DataError, ValueError):
    """A column has zero variance where scaling needs a positive one."""


class ParseError(DataError):
    """An input file could not be parsed."""

    def __init__(self, message: str, line: int = None, module: str = 'cli_io'):
        super().__init__(message if line is None else f'{message} (line {line})', module)
        self.line = line


class NumericalError(MediationError):
    """A numerical procedure could not produce a trustworthy result."""
    exit_code = 3


class SingularGramError(NumericalError):
    """The n x n Gram matrix is not invertible."""


class IllConditionedError(NumericalError):
    """A solve produced non-finite values."""


class RankDeficientError(NumericalError):
    """A least-squares design does not have full column rank."""


class FactorizationError(NumericalError):
    """A Cholesky factorization failed; a larger delta may help."""


class DegenerateProjectionError(NumericalError):
    """The projection direction is numerically orthogonal to its mediator."""
