"""Shared exception types."""


class VlocError(Exception):
    """Base class for errors raised by this package."""


class ScanFormatError(VlocError):
    """A scan document is malformed or violates referential integrity."""


class EmbeddingFormatError(VlocError):
    """An embedding file is malformed, truncated, or inconsistent."""


class SampleFormatError(VlocError):
    """A sample, narration, or landmark document is malformed."""


class EvalError(VlocError):
    """An evaluation run cannot proceed as configured."""
