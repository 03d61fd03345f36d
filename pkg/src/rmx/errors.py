"""Exception hierarchy.

Data problems (bad files, unknown variables, missing covariates) and
computation problems (non-convergence, degenerate inputs) are separate
branches so the CLI can map them to distinct exit codes.
"""


class RmxError(Exception):
    """Base class for all rmx errors."""


class DataError(RmxError):
    """Invalid input data or request (CLI exit code 3)."""


class SchemaError(DataError):
    """Schema definition or header/schema mismatch problems."""


class ParseError(DataError):
    """Unparseable cell; carries the 1-based data row and column name."""

    def __init__(self, row: int, column: str, message: str):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: {message}")


class RangeError(DataError):
    """Value outside the declared valid range."""

    def __init__(self, row: int, column: str, value: float):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}, column {column!r}: value {value} out of range")


class UnknownVariableError(DataError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown variable {name!r}")


class MissingCovariateError(DataError):
    """A row selected for scoring is missing a model covariate."""

    def __init__(self, row: int, variable: str):
        self.row = row
        self.variable = variable
        super().__init__(f"row {row} is missing model covariate {variable!r}")


class ComputationError(RmxError):
    """Numeric procedure failed (CLI exit code 4)."""


class ConvergenceError(ComputationError):
    pass


class DegenerateInputError(ComputationError):
    """Inputs make a statistic undefined (no comparable pairs, constant
    scores, zero-norm sensitive direction, empty group side)."""

    def __init__(self, message: str, reason: str = "degenerate"):
        self.reason = reason
        super().__init__(message)


class CalibrationError(ComputationError):
    """Incidence target unreachable; carries the achievable bracket."""

    def __init__(self, target: float, low: float, high: float):
        self.target = target
        self.achievable = (low, high)
        super().__init__(
            f"incidence target {target} unreachable; achievable range "
            f"[{low:.6g}, {high:.6g}]"
        )
