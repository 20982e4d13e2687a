"""Exception hierarchy shared by all modules.

Every error raised on bad input derives from :class:`CodedLFError`; the CLI
maps that family to the data-error exit code.
"""


class CodedLFError(Exception):
    """Base class for all library errors."""


class InvalidArgument(CodedLFError, ValueError):
    """An argument violates a documented precondition."""


class InsufficientData(CodedLFError):
    """Too few known samples to interpolate."""


class DegeneratePlane(CodedLFError):
    """A plane passes through the optical center (c == 0)."""


class DegenerateProbes(CodedLFError):
    """Probe points are collinear, so no unique affine map exists."""


class AmbiguousMatch(CodedLFError):
    """The block-matching cost curve is flat."""


class OutOfBounds(CodedLFError):
    """A matching window does not fit inside the image."""


class InvalidSpec(CodedLFError):
    """A scene description cannot be rendered as requested."""


class FormatError(CodedLFError):
    """A file on disk does not match the expected format."""
