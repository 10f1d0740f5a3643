"""Exception hierarchy.

The CLI maps these onto exit codes: ValidationError -> 2,
InsufficientDataError -> 3, NonconvergenceError -> 4.
"""


class QuartercastError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QuartercastError):
    """Invalid input data, configuration, or arguments."""


class CalendarUnderflowError(ValidationError):
    """Quarter arithmetic stepped before fiscal year 1."""


class ContiguityError(ValidationError):
    """A quarterly series has a gap or is out of order."""


class DuplicateKeyError(ValidationError):
    """The same (geography, quarter) appeared twice in an input file."""


class SchemaMismatchError(ValidationError):
    """Feature vectors, reports, or files do not line up structurally."""


class MissingIndicatorError(ValidationError):
    """A macro indicator required by the configuration is absent."""


class UnknownGeographyError(ValidationError):
    """Prediction requested for a geography the model never saw."""


class InsufficientDataError(QuartercastError):
    """Not enough history to fit a model or build a feature row."""


class NonconvergenceError(QuartercastError):
    """No candidate model could be estimated on the given data."""
