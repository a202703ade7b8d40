"""Exception types raised across the package."""


class RonTrojanError(Exception):
    """Base class for all package errors."""


class SchemaError(RonTrojanError, ValueError):
    """CSV header does not match the expected column layout."""

    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


class RowError(RonTrojanError, ValueError):
    """A data row could not be parsed or violates a sample invariant."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyDatasetError(RonTrojanError, ValueError):
    pass


class DegenerateFeatureError(RonTrojanError, ValueError):
    """A feature has zero variance, so it cannot be standardized."""

    def __init__(self, feature_index: int):
        super().__init__(f"feature {feature_index} has zero variance")
        self.feature_index = feature_index


class ConvergenceError(RonTrojanError, RuntimeError):
    """The SVM solver hit its iteration cap before meeting the KKT tolerance."""

    def __init__(self, message: str, max_violation: float):
        super().__init__(f"{message} (max KKT violation {max_violation:.3g})")
        self.max_violation = max_violation


class DataError(RonTrojanError, ValueError):
    """The data cannot support the requested procedure (e.g. unusable folds)."""
