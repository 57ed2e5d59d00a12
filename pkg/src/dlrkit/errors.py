"""Exception types shared across the toolkit.

The CLI maps these onto process exit codes: usage problems exit with 1,
data/validation problems with 2, numerical failures with 3.
"""


class DlrError(Exception):
    """Base class for all toolkit errors."""


class UsageError(DlrError):
    """Bad command line: unknown flag, missing argument, invalid flag value."""


class DataError(DlrError):
    """Malformed or invariant-violating input: CSV, spec file, model file."""


class NumericalError(DlrError):
    """Numerical failure: bracket failure, non-finite loss, divergence."""
