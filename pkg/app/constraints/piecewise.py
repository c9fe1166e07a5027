"""Piecewise profile: each segment delegates to its own kind from its start step on."""

from bisect import bisect_right
from typing import Type

from pydantic import BaseModel

from app.constraints.base import ProfileKind
from app.constraints.registry import ProfileRegistry
from app.schemas.constraints import PiecewiseProfile


class PiecewiseKind(ProfileKind):

    @property
    def kind_id(self) -> str:
        return "piecewise"

    @property
    def params_schema(self) -> Type[BaseModel]:
        return PiecewiseProfile

    def evaluate(self, params: PiecewiseProfile, k: int) -> float:
        starts = [s.start for s in params.segments]
        segment = params.segments[bisect_right(starts, k) - 1]
        return ProfileRegistry.evaluate(segment.profile, k)

    def supremum(self, params: PiecewiseProfile) -> float:
        return max(ProfileRegistry.supremum(s.profile) for s in params.segments)
