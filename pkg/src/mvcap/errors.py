"""Exception taxonomy shared across the package.

Binary container errors (feature caches, frame files, checkpoints) are split
into three classes so callers can distinguish "not one of our files" from
"ours but a version we cannot read" from "ours but damaged".
"""


class MvcapError(Exception):
    """Base class for all package errors."""


class ManifestParseError(MvcapError):
    """Manifest text is not well-formed JSON. Carries the byte offset."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class ManifestValidationError(MvcapError):
    """A manifest record violates a sample invariant. Names sample and field."""

    def __init__(self, message, sample_id=None, field=None):
        super().__init__(message)
        self.sample_id = sample_id
        self.field = field


class EmptyWindowError(MvcapError):
    """Event window starts past the last available frame."""


class FormatError(MvcapError):
    """Binary stream does not start with the expected magic."""


class VersionError(MvcapError):
    """Binary stream declares a version this build cannot read."""


class CorruptError(MvcapError):
    """Binary stream is truncated or internally inconsistent."""


class MetricsError(MvcapError):
    """Metric preconditions violated (e.g. degenerate corpus for idf)."""


class TrainError(MvcapError):
    """Training step failed; message carries the offending sample id."""


class DivergenceError(TrainError):
    """Loss became non-finite during training."""
