"""Shared exception types for file I/O."""


class CorruptFileError(ValueError):
    """Raised when a file's container structure is damaged or inconsistent."""


class UnsupportedFormatError(ValueError):
    """Raised when a file uses a codec or layout this library does not read."""
