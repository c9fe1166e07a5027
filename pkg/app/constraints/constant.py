"""Constant rate limit."""

from typing import Type

from pydantic import BaseModel

from app.constraints.base import ProfileKind
from app.schemas.constraints import ConstantProfile


class ConstantKind(ProfileKind):

    @property
    def kind_id(self) -> str:
        return "constant"

    @property
    def params_schema(self) -> Type[BaseModel]:
        return ConstantProfile

    def evaluate(self, params: ConstantProfile, k: int) -> float:
        return params.value

    def supremum(self, params: ConstantProfile) -> float:
        return params.value
