"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericalError -> 4.
"""


class ConfigError(ValueError):
    """Invalid configuration file or command-line override."""


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class NumericalError(RuntimeError):
    """A numerical procedure cannot proceed or has failed."""


class DivergenceError(NumericalError):
    """An iterative run produced non-finite values."""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


class SingularSystemError(NumericalError):
    """A linear system is singular or too ill-conditioned to solve."""
