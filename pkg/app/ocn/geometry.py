"""
Height / volume conversions and flow-constraint translation.

The volume stored above the zero reference of a trapezoidal channel is::

    V(x) = L·b·x + L·tan(θ)·x²

and, for ``θ > 0``, its inverse is ``x = √(a′ + b′·V) − c′``.  Because
``dV/dx`` grows with ``x``, the slope at the top of the section, ``w``,
bounds every secant slope ``w̲`` the channel can realise between two
admissible heights.  A volume-rate limit ``C`` therefore maps to the
height-rate limit ``c = C / w`` without ever violating ``C``.
"""

from __future__ import annotations

import math

from app.core.errors import GeometryError
from app.schemas.geometry import ChannelGeometry

_RANGE_SLACK = 1e-12


def _check_height(g: ChannelGeometry, x: float) -> None:
    if x < g.x_lower - _RANGE_SLACK:
        raise GeometryError(f"Height increment {x} is below the lower bound x_lower={g.x_lower}")
    if x > g.x_upper + _RANGE_SLACK:
        raise GeometryError(f"Height increment {x} is above the upper bound x_upper={g.x_upper}")


def volume_from_height(g: ChannelGeometry, x_tilde: float) -> float:
    """Volume increment (m³) for a height increment (m)."""
    _check_height(g, x_tilde)
    return g.L * g.b * x_tilde + g.L * g.tan_theta * x_tilde ** 2


def height_from_volume(g: ChannelGeometry, V: float) -> float:
    """Height increment (m) for a volume increment (m³)."""
    scale = max(1.0, abs(g.V_lower), abs(g.V_upper))
    if V < g.V_lower - _RANGE_SLACK * scale:
        raise GeometryError(f"Volume {V} is below the lower bound V_lower={g.V_lower}")
    if V > g.V_upper + _RANGE_SLACK * scale:
        raise GeometryError(f"Volume {V} is above the upper bound V_upper={g.V_upper}")

    if g.is_rectangular:
        return V / (g.L * g.b)

    radicand = g.a_prime + g.b_prime * V
    if radicand < 0.0:
        raise GeometryError(f"a' + b'V = {radicand} is negative: geometry and volume are inconsistent")
    return math.sqrt(radicand) - g.c_prime


def w_lower(g: ChannelGeometry, x_from: float, x_to: float) -> float:
    """Secant slope ``ΔV/Δx`` between two heights (the tangent when they coincide)."""
    _check_height(g, x_from)
    _check_height(g, x_to)
    if x_from == x_to:
        return g.L * g.b + 2.0 * g.L * g.tan_theta * x_from
    return g.L * g.b + g.L * g.tan_theta * (x_from + x_to)


def flow_to_height_limits(g: ChannelGeometry, C_D: float, C_U: float) -> tuple[float, float]:
    """Translate volume-rate limits (m³/step) into height-rate limits (m/step)."""
    if C_D <= 0.0 or C_U <= 0.0:
        raise GeometryError(f"Flow limits must be positive, got C_D={C_D}, C_U={C_U}")
    w = g.w
    return C_D / w, C_U / w


def check_volume_chain(g: ChannelGeometry, x_from: float, x_to: float, c_J: float, C_J: float,
                       tol: float = 1e-12) -> bool:
    """``|ΔV| ≤ w̲·c_J ≤ w·c_J ≤ C_J`` for a step with ``|Δx| ≤ c_J``.

    Returns ``False`` when the step itself exceeds ``c_J`` or any link of the
    chain fails.
    """
    dx = abs(x_to - x_from)
    if dx > c_J + tol:
        return False
    wl = w_lower(g, x_from, x_to)
    dV = abs(volume_from_height(g, x_to) - volume_from_height(g, x_from))
    scale = max(1.0, C_J)
    return (dV <= wl * c_J + tol * scale
            and wl * c_J <= g.w * c_J + tol * scale
            and g.w * c_J <= C_J + tol * scale)
