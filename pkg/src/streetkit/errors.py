"""Exception types shared across the toolkit."""
from __future__ import annotations


class StreetKitError(Exception):
    """Base class for all streetkit errors."""


class ConfigurationError(StreetKitError):
    """A parameter value is outside its valid range."""


class EmptyGraphError(StreetKitError):
    """A metric was requested on a graph with no qualifying vertices."""


class NoValidPairsError(StreetKitError):
    """No vertex pair satisfies the minimum separation requirement."""


class EmptyCorpusError(StreetKitError):
    """A corpus comparison was requested on an empty corpus."""


class LatitudeOutOfRangeError(StreetKitError):
    """A latitude falls outside the Web Mercator domain."""


class MissingCoverageError(StreetKitError):
    """A condition-layer source does not cover the requested patch window."""
