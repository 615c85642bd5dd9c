"""Exception hierarchy shared by the library and the CLI."""


class FreqFusionError(Exception):
    pass


class ShapeError(FreqFusionError, ValueError):
    """Incompatible tensor shapes, kernel sizes or configuration values."""


class ShapeMismatch(ShapeError):
    """A named weight entry does not have the shape the config requires."""

    def __init__(self, entry, expected=None, actual=None):
        self.entry = entry
        self.expected = expected
        self.actual = actual
        msg = f"weight entry {entry!r}"
        if expected is not None:
            msg += f": expected shape {tuple(expected)}, got {tuple(actual)}"
        super().__init__(msg)


class FormatError(FreqFusionError, ValueError):
    """Base class for malformed container files."""


class BadMagic(FormatError):
    pass


class UnsupportedVersion(FormatError):
    pass


class TruncatedFile(FormatError):
    pass


class TrailingBytes(FormatError):
    pass


class InvalidHeader(FormatError):
    pass


class NonFiniteValue(FormatError):
    pass


class DuplicateEntry(FormatError):
    pass


class MissingEntry(FormatError):
    pass


class ValidationError(FreqFusionError):
    """An optimized kernel disagreed with its reference implementation."""
