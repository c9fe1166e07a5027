"""
Decaying-cosine rate limit.

Models a supply that ramps up from almost nothing and oscillates while the
ramp saturates::

    c(k) = amp · (1 − decay^{k+1}) · [1 − decay^{k+1} · |cos(k / period)|]

The raw expression starts at ``amp·(1−decay)²`` when ``k = 0`` (0.0175 with
the defaults).  A ``floor`` clamps it from below; the default floor 0.6825
gives the minimum limit that the nominal experiments assume.  Setting
``floor = 0`` evaluates the expression literally.
"""

import math
from typing import Type

from pydantic import BaseModel

from app.constraints.base import ProfileKind
from app.schemas.constraints import WaveformProfile


def waveform_value(amp: float, decay: float, period: float, k: int) -> float:
    """Unclamped waveform value at step *k*."""
    ramp = decay ** (k + 1)
    return amp * (1.0 - ramp) * (1.0 - ramp * abs(math.cos(k / period)))


class WaveformKind(ProfileKind):

    @property
    def kind_id(self) -> str:
        return "waveform"

    @property
    def params_schema(self) -> Type[BaseModel]:
        return WaveformProfile

    def evaluate(self, params: WaveformProfile, k: int) -> float:
        return max(params.floor, waveform_value(params.amp, params.decay, params.period, k))

    def supremum(self, params: WaveformProfile) -> float:
        return max(params.floor, params.amp)
