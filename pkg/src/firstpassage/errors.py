"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class FirstPassageError(Exception):
    """Base class for all errors raised by this package."""


class NumericalError(FirstPassageError):
    """A computation produced a result that cannot be trusted."""


class SingularSystem(NumericalError):
    """``I - U`` is numerically singular: some state never reaches absorption."""


class TrajectoryOverflow(NumericalError):
    """A simulated trajectory exceeded the step cap without being absorbed."""


class InvalidProbabilityVector(FirstPassageError, ValueError):
    """A probability vector has a negative entry or does not sum to one."""


class MonteCarloError(FirstPassageError):
    """A Monte Carlo run could not produce a usable estimate."""


class TooManySkips(MonteCarloError):
    """The fraction of failed replicates exceeded the configured maximum."""


class InsufficientReplicates(MonteCarloError):
    """Fewer than two replicates survived, so no variance can be formed."""


class ParseError(FirstPassageError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ValidationError(FirstPassageError, ValueError):
    """Input parsed but violates one or more invariants."""

    def __init__(self, violations: list[str] | str):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
