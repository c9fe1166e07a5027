"""
Domain error types.

All errors raised by the algorithms derive from :class:`OcnError`.  Most of
them are also :class:`ValueError` so callers that only care about "bad
input" can catch the builtin.
"""


class OcnError(Exception):
    """Base class for every error raised by this package."""


class TopologyError(OcnError, ValueError):
    """Invalid junction graph or edge-list input."""


class WeightsError(OcnError, ValueError):
    """A consensus matrix violates its structural invariants."""


class SpectralError(OcnError):
    """The symmetric eigensolver failed or returned an inconsistent spectrum."""


class GeometryError(OcnError, ValueError):
    """Channel geometry or a height/volume argument is out of range."""


class ProfileError(OcnError, ValueError):
    """A constraint profile is malformed or evaluated to a non-positive value."""


class ProtocolError(OcnError, ValueError):
    """Invalid argument handed to the reference generation protocol."""


class ScenarioError(OcnError, ValueError):
    """Scenario configuration could not be parsed or resolved."""
