"""
Profile-kind registry.

Central registry for all available constraint-profile kinds.  Kinds are
registered at import time via :func:`ProfileRegistry.register` and looked up
by the ``kind`` discriminator of a profile spec.
"""

from __future__ import annotations

from pydantic import BaseModel

from app.constraints.base import ProfileKind
from app.core.errors import ProfileError


class ProfileRegistry:
    """Singleton registry of available profile kinds."""

    _kinds: dict[str, ProfileKind] = {}

    @classmethod
    def register(cls, kind: ProfileKind) -> None:
        """Register a profile kind.

        Raises :class:`ValueError` if ``kind_id`` is already taken.
        """
        if kind.kind_id in cls._kinds:
            raise ValueError(f"Profile kind '{kind.kind_id}' already registered")
        cls._kinds[kind.kind_id] = kind

    @classmethod
    def get_or_raise(cls, kind_id: str) -> ProfileKind:
        """Get a kind by *kind_id*.

        Raises :class:`KeyError` if not found.
        """
        kind = cls._kinds.get(kind_id)
        if not kind:
            raise KeyError(f"Profile kind '{kind_id}' not registered. Available: {list(cls._kinds.keys())}")
        return kind

    @classmethod
    def available_kind_ids(cls) -> list[str]:
        return sorted(cls._kinds.keys())

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    @classmethod
    def evaluate(cls, spec: BaseModel, k: int) -> float:
        """Evaluate any profile spec at step *k*.

        Raises:
            ProfileError: Negative step or a non-positive result.
        """
        if k < 0:
            raise ProfileError(f"Constraint profiles are defined for k >= 0, got k={k}")
        kind = cls.get_or_raise(spec.kind)
        value = float(kind.evaluate(spec, k))
        if not value > 0.0:
            raise ProfileError(f"Profile '{spec.kind}' evaluated to {value!r} at k={k}; limits must be positive")
        return value

    @classmethod
    def supremum(cls, spec: BaseModel) -> float:
        return cls.get_or_raise(spec.kind).supremum(spec)
