"""
Constraint-profile schemas.

A profile is a pure function of the protocol step ``k`` that returns a
strictly positive rate limit.  Profiles are assigned per direction
(download = decreasing reference, upload = increasing reference) with a
network-wide default and optional per-channel overrides keyed by the
1-based channel index.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import settings


class ConstantProfile(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["constant"] = "constant"
    value: float = Field(..., gt=0.0, description="Rate limit, identical at every step")


class WaveformProfile(BaseModel):
    """``amp·(1 − decay^{k+1})·[1 − decay^{k+1}·|cos(k/period)|]``, clamped below at ``floor``.

    ``floor = 0`` evaluates the expression literally (0.0175 at ``k = 0``
    with the default parameters).
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["waveform"] = "waveform"
    amp: float = Field(7.0, gt=0.0)
    decay: float = Field(0.95, gt=0.0, lt=1.0)
    period: float = Field(10.0, gt=0.0, description="Divisor of k inside the cosine")
    floor: float = Field(default_factory=lambda: settings.DEFAULT_UPLOAD_FLOOR, ge=0.0)


class ProfileSegment(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    start: int = Field(..., ge=0, description="First step at which this segment is active")
    profile: "ProfileSpec"


class PiecewiseProfile(BaseModel):
    """Segments active from their ``start`` step until the next segment starts."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["piecewise"] = "piecewise"
    segments: tuple[ProfileSegment, ...] = Field(..., min_length=1)

    @field_validator("segments")
    @classmethod
    def _check_order(cls, segments: tuple[ProfileSegment, ...]) -> tuple[ProfileSegment, ...]:
        if segments[0].start != 0:
            raise ValueError(f"first segment must start at step 0, got {segments[0].start}")
        starts = [s.start for s in segments]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError(f"segment starts must be strictly increasing, got {starts}")
        return segments


ProfileSpec = Annotated[Union[ConstantProfile, WaveformProfile, PiecewiseProfile], Field(discriminator="kind")]

ProfileSegment.model_rebuild()
PiecewiseProfile.model_rebuild()


class ChannelProfiles(BaseModel):
    """Profile assignment for one direction: a default plus per-channel overrides."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    default: ProfileSpec
    channels: dict[int, ProfileSpec] = Field(default_factory=dict, description="1-based channel -> profile")

    @field_validator("channels")
    @classmethod
    def _check_keys(cls, channels: dict[int, ProfileSpec]) -> dict[int, ProfileSpec]:
        bad = [c for c in channels if c < 1]
        if bad:
            raise ValueError(f"channel keys are 1-based, got {bad}")
        return channels


class ConstraintSpec(BaseModel):
    """Download and upload limits.

    With ``units = "flow"`` the profiles give volume-rate limits (m³/step)
    that are divided channel-wise by the geometry factor ``w_i``.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    units: Literal["height", "flow"] = "height"
    download: ChannelProfiles = Field(default_factory=lambda: ChannelProfiles(default=ConstantProfile(value=5.0)))
    upload: ChannelProfiles = Field(default_factory=lambda: ChannelProfiles(default=WaveformProfile()))


class FaultSpec(BaseModel):
    """A sudden change of the limits on some channels during ``[start, end)``."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    start: int = Field(..., ge=0)
    end: int | None = Field(None, description="First step back to nominal; None = permanent")
    download: ProfileSpec | None = None
    upload: ProfileSpec | None = None
    channels: tuple[int, ...] | None = Field(None, description="1-based channels hit; None = all")

    @model_validator(mode="after")
    def _check_fault(self) -> "FaultSpec":
        if self.end is not None and self.end <= self.start:
            raise ValueError(f"fault end {self.end} must be after start {self.start}")
        if self.download is None and self.upload is None:
            raise ValueError("a fault must replace the download profile, the upload profile, or both")
        if self.channels is not None and any(c < 1 for c in self.channels):
            raise ValueError("fault channels are 1-based")
        return self
