"""
Constraint-profile plugin system.

Import this module to register all available profile kinds.
New kinds are added by:
  1. Creating a class implementing :class:`ProfileKind`
  2. Adding its parameter model to ``app.schemas.constraints.ProfileSpec``
  3. Adding a registration line below
"""

from app.constraints.constant import ConstantKind
from app.constraints.piecewise import PiecewiseKind
from app.constraints.registry import ProfileRegistry
from app.constraints.waveform import WaveformKind

# Register all built-in kinds
ProfileRegistry.register(ConstantKind())
ProfileRegistry.register(WaveformKind())
ProfileRegistry.register(PiecewiseKind())

__all__ = ["ProfileRegistry"]
