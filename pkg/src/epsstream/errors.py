"""Exceptions shared across the package."""


class EpsStreamError(Exception):
    """Base class for all package errors."""


class FamilyMismatchError(EpsStreamError):
    """A descriptor or snapshot was used with the wrong range family."""


class CapExceededError(EpsStreamError):
    """An enumeration was requested on more points than the family cap allows."""


class CertificationError(EpsStreamError):
    """An internally produced sample failed its exact certification check."""


class StreamParseError(EpsStreamError):
    """Malformed textual input; carries the 1-based line number when known."""

    def __init__(self, message, line_no=None):
        super().__init__(message if line_no is None else f"line {line_no}: {message}")
        self.line_no = line_no
