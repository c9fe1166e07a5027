"""
Trapezoidal channel geometry.

A channel of length ``L`` has a bottom width ``b`` at its zero reference
height ``h_Z`` and banks sloping at ``theta`` from the vertical.  Heights are
increments ``x`` relative to ``h_Z``, so the admissible interval is
``[-h_Z, h_S - h_Z]``.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ChannelGeometry(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    L: float = Field(..., gt=0.0, description="Length (m)")
    b: float = Field(..., gt=0.0, description="Width at the zero reference height (m)")
    theta: float = Field(0.0, ge=0.0, lt=math.pi / 2, description="Bank slope angle (rad); 0 = rectangular")
    h_Z: float = Field(..., ge=0.0, description="Zero reference height (m)")
    h_S: float = Field(..., gt=0.0, description="Section height (m)")

    @model_validator(mode="after")
    def _check_reference(self) -> "ChannelGeometry":
        if self.h_Z > self.h_S:
            raise ValueError(f"h_Z={self.h_Z} exceeds the section height h_S={self.h_S}")
        bottom = self.b - 2.0 * math.tan(self.theta) * self.h_Z
        if bottom < -1e-12:
            raise ValueError(f"Bottom width b - 2·tan(theta)·h_Z = {bottom} is negative")
        return self

    # ------------------------------------------------------------------
    # Derived quantities
    # ------------------------------------------------------------------

    @property
    def is_rectangular(self) -> bool:
        return self.theta == 0.0

    @property
    def tan_theta(self) -> float:
        return math.tan(self.theta)

    @property
    def a_prime(self) -> float:
        return self.b ** 2 / (4.0 * self.tan_theta ** 2)

    @property
    def b_prime(self) -> float:
        return 1.0 / (self.L * self.tan_theta)

    @property
    def c_prime(self) -> float:
        return self.b / (2.0 * self.tan_theta)

    @property
    def x_lower(self) -> float:
        return -self.h_Z

    @property
    def x_upper(self) -> float:
        return self.h_S - self.h_Z

    @property
    def V_lower(self) -> float:
        return self.L * self.b * self.x_lower + self.L * self.tan_theta * self.x_lower ** 2

    @property
    def V_upper(self) -> float:
        return self.L * self.b * self.x_upper + self.L * self.tan_theta * self.x_upper ** 2

    @property
    def w(self) -> float:
        """Flow-translation factor: the largest ``dV/dx`` on the admissible range."""
        if self.is_rectangular:
            return self.L * self.b
        return 2.0 / self.b_prime * math.sqrt(self.a_prime + self.b_prime * self.V_upper)
