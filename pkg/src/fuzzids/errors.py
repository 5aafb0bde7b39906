"""Exception hierarchy shared across the package."""


class FuzzidsError(Exception):
    """Base class for all package errors."""


class LoadError(FuzzidsError):
    """Raised when a data file cannot be parsed."""


class SchemaError(FuzzidsError):
    """Raised when data does not match its declared schema."""


class ConfigError(FuzzidsError):
    """Raised for invalid experiment or classifier configuration."""


class TrainingError(FuzzidsError):
    """Raised when a model cannot be trained on the given data."""


class EvaluationError(FuzzidsError):
    """Raised for undefined metric computations (e.g. ROC on one class)."""
