from __future__ import annotations


class DgqError(Exception):
    """Base class for all errors raised by this package."""


class GraphError(DgqError, ValueError):
    pass


class ParseError(DgqError, ValueError):
    pass


class InvariantError(DgqError, ValueError):
    pass


class CapExceeded(DgqError, RuntimeError):
    """A configured state, subset or tuple cap was hit."""
