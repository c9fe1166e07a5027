"""
Abstract base class for constraint-profile kinds.

Every profile kind must implement this interface.  A kind defines:

- A unique identifier (the ``kind`` key of the scenario file)
- The pydantic schema of its parameters
- An evaluation method (parameters, step -> rate limit)
"""

from abc import ABC, abstractmethod
from typing import Type

from pydantic import BaseModel


class ProfileKind(ABC):
    """Abstract base class that every profile kind must implement."""

    @property
    @abstractmethod
    def kind_id(self) -> str:
        """Unique identifier, e.g. ``'constant'``."""
        ...

    @property
    @abstractmethod
    def params_schema(self) -> Type[BaseModel]:
        """Pydantic schema of the profile parameters."""
        ...

    @abstractmethod
    def evaluate(self, params: BaseModel, k: int) -> float:
        """Rate limit at step *k*.

        Args:
            params: Instance of :attr:`params_schema`.
            k: Protocol step, ``k >= 0``.

        Returns:
            The raw value; positivity is enforced by the caller.
        """
        ...

    # ------------------------------------------------------------------
    # Optional overrides with sensible defaults
    # ------------------------------------------------------------------

    def supremum(self, params: BaseModel) -> float:
        """An upper bound over every step.  Default: ``inf`` (unknown)."""
        return float("inf")
