"""Exception types shared across the package.

The CLI maps these onto exit codes: validation / parse / I-O problems exit
with 2, a gradient-check tolerance violation with 1, and a numerical abort
during training with 3.
"""


class WranksimError(Exception):
    """Base class for all package-specific errors."""


class DomainError(WranksimError, ValueError):
    """An operation was called with arguments outside its contract."""


class ValidationError(WranksimError, ValueError):
    """A configuration value or file failed schema validation."""


class ParseError(WranksimError, ValueError):
    """A data or config file could not be parsed; message carries location."""


class TrainingDivergedError(WranksimError, RuntimeError):
    """Training produced a non-finite loss; message names the step."""
