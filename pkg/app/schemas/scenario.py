"""
Scenario configuration.

A scenario is a JSON document describing one experiment: the network,
optional channel geometry, rate limits, an optional fault, the initial
references and the protocol parameters.  Unknown keys are rejected; every
omitted parameter takes the default from :mod:`app.core.config`.

Channel and junction indices in scenario files are 1-based.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.config import settings
from app.schemas.constraints import ConstraintSpec, FaultSpec
from app.schemas.geometry import ChannelGeometry

# ======================================================================
# Topology
# ======================================================================


class EdgesTopology(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["edges"] = "edges"
    edges: tuple[tuple[int, int], ...] = Field(..., min_length=2, description="1-based junction pairs")
    m: int | None = Field(None, description="Junction count; defaults to the largest index")
    labels: tuple[str, ...] | None = None


class CompleteTopology(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["complete"] = "complete"
    m: int = Field(..., ge=3)


class PathTopology(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["path"] = "path"
    m: int = Field(..., ge=3)


class StarTopology(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["star"] = "star"
    m: int = Field(..., ge=3, description="Hub plus m-1 leaves")


class CycleTopology(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["cycle"] = "cycle"
    m: int = Field(..., ge=3)


class FileTopology(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["file"] = "file"
    path: str = Field(..., description="Edge-list file, relative to the scenario file")
    m: int | None = None


TopologySpec = Annotated[
    Union[EdgesTopology, CompleteTopology, PathTopology, StarTopology, CycleTopology, FileTopology],
    Field(discriminator="kind"),
]

# ======================================================================
# Geometry
# ======================================================================


class GeometrySpec(BaseModel):
    """Channel geometry: a default for every channel plus 1-based overrides (``null`` = none)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    default: ChannelGeometry | None = None
    channels: dict[int, ChannelGeometry | None] = Field(default_factory=dict)

    @field_validator("channels")
    @classmethod
    def _check_keys(cls, channels: dict[int, ChannelGeometry | None]) -> dict[int, ChannelGeometry | None]:
        bad = [c for c in channels if c < 1]
        if bad:
            raise ValueError(f"channel keys are 1-based, got {bad}")
        return channels


# ======================================================================
# Initial references
# ======================================================================


class ExplicitInit(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["explicit"] = "explicit"
    values: tuple[float, ...] = Field(..., min_length=1, description="Raw initial increments, one per channel")


class RandomInit(BaseModel):
    """Uniform on ``[-1, 1]^n`` (numpy ``default_rng(seed)``), optionally detrended, scaled to a sup-norm."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["random"] = "random"
    seed: int = Field(0, ge=0)
    target_inf_norm: float = Field(default_factory=lambda: settings.DEFAULT_TARGET_INF_NORM, gt=0.0)
    zero_mean: bool = True


class EmbedIntoCompleteInit(BaseModel):
    """Initial state of a sparse network copied onto the complete network over the same junctions.

    Channels of the complete graph that also exist in the sparse one take
    its value; every other channel starts at zero.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["embed_into_complete"] = "embed_into_complete"
    source: TopologySpec
    source_init: Annotated[Union[ExplicitInit, RandomInit], Field(discriminator="kind")]


InitSpec = Annotated[Union[ExplicitInit, RandomInit, EmbedIntoCompleteInit], Field(discriminator="kind")]

# ======================================================================
# Scenario
# ======================================================================


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    description: str = ""

    topology: TopologySpec
    geometry: GeometrySpec | None = None
    constraints: ConstraintSpec = Field(default_factory=ConstraintSpec)
    fault: FaultSpec | None = None
    init: InitSpec | None = Field(None, description="Required by run/compare; optional for report-topology")

    gamma: float = Field(default_factory=lambda: settings.DEFAULT_GAMMA, gt=0.0)
    zeta: float = Field(default_factory=lambda: settings.DEFAULT_ZETA, gt=0.0, lt=1.0)
    k_max: int = Field(default_factory=lambda: settings.DEFAULT_K_MAX, ge=0)
    sampling_period: float = Field(default_factory=lambda: settings.SAMPLING_PERIOD, gt=0.0,
                                   description="T_s in seconds; reporting only")

    mode: Literal["centralized", "distributed", "compare"] = "centralized"
    detrend_mode: Literal["exact", "consensus"] = "exact"
    workers: int = Field(default_factory=lambda: settings.SIM_WORKERS, ge=1)
    precomputed_constraints: bool = False
