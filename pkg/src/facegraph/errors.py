"""Exception types raised across the pipeline.

Every error the library raises on purpose derives from FacegraphError, so
callers can catch one base class at CLI or service boundaries. File-system
failures (missing manifest, unreadable path) surface as the builtin OSError.
"""

from __future__ import annotations

__all__ = [
    "FacegraphError",
    "NormalizationError",
    "DimensionError",
    "EmptySetError",
    "ConfigError",
    "SourceUnavailableError",
    "ParseError",
    "EmptySampleSetError",
    "MissingReferenceError",
    "NotFoundError",
    "EmptyDictionaryError",
    "DecodeError",
]


class FacegraphError(Exception):
    """Base class for all errors raised deliberately by this package."""


class NormalizationError(FacegraphError):
    """A vector could not be scaled to unit length (zero or non-finite norm)."""


class DimensionError(FacegraphError):
    """Two vectors (or a vector and a model) disagree on dimensionality."""


class EmptySetError(FacegraphError):
    """An aggregate was requested over an empty collection."""


class ConfigError(FacegraphError):
    """A parameter or configuration value is out of its legal range."""


class SourceUnavailableError(FacegraphError):
    """A remote source stayed unreachable after all retry attempts."""


class ParseError(FacegraphError):
    """A response or file had a shape the parser does not understand."""


class EmptySampleSetError(FacegraphError):
    """Sample gathering produced no faces at all for an entity."""


class MissingReferenceError(FacegraphError):
    """The reference strategy was requested but no reference face is set."""


class NotFoundError(FacegraphError):
    """A named entity or face does not exist in the addressed collection."""


class EmptyDictionaryError(FacegraphError):
    """An identification dictionary ended up with no usable entries."""


class DecodeError(FacegraphError):
    """An image or a provider response could not be decoded."""
