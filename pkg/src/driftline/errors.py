"""Exception types shared across the package."""


class DriftlineError(Exception):
    """Base class for all package errors."""


class DataError(DriftlineError):
    """Unreadable or structurally invalid input data."""


class ConfigError(DriftlineError):
    """Invalid configuration or command-line usage."""


class TrainingError(DriftlineError):
    """Model training failed (non-finite update, bad state)."""


class EmptyVocabularyError(TrainingError):
    """No term survived vocabulary construction."""
