from __future__ import annotations


class HistanonError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(HistanonError, ValueError):
    """Input data is malformed or violates a structural invariant."""


class FormatError(ValidationError):
    """A file could not be parsed in its documented format."""
