"""Exception types shared across the package.

Argument and precondition violations raise plain ValueError; the classes
here cover failures a caller may want to catch separately (bad files,
version skew, metrics that are undefined for the given input).
"""


class EifError(Exception):
    """Base class for operational errors raised by this package."""


class ModelFormatError(EifError):
    """A model file is corrupt, truncated, or structurally invalid."""


class UnsupportedVersionError(ModelFormatError):
    """A model file declares a format version this build cannot read."""


class CsvFormatError(EifError):
    """A CSV file is malformed; the message carries line/column context."""


class UndefinedMetricError(ValueError):
    """A ranking metric was requested on input where it is undefined."""
