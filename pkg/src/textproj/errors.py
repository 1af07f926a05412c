"""Exception hierarchy shared across the toolkit."""


class TextProjError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(TextProjError):
    """Invalid parameter, pattern, or configuration file."""


class IngestError(TextProjError):
    """The corpus root could not be read at all."""


class TrainingError(TextProjError):
    """Not enough data to train a model or profile."""


class UndefinedCoverageError(TextProjError):
    """Coverage requested over zero analyzable lines."""


class LayoutError(TextProjError):
    """A visualization cannot be laid out on the given canvas."""


class AgreementError(TextProjError):
    """Coder agreement cannot be computed on the given units."""
