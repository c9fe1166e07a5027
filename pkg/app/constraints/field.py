"""
Per-channel constraint field.

Resolves the download/upload profile assignment of a scenario into one
profile per channel, applies the optional fault overlay and the flow-unit
translation, and evaluates the whole network at a step ``k``.

Channels sharing the same profile object are evaluated once per step, and
every step is cached, so the centralized runner, the distributed simulator
and the analysis all read identical numbers.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from app.constraints.registry import ProfileRegistry
from app.core.errors import ProfileError
from app.core.logging import get_logger
from app.ocn.geometry import flow_to_height_limits
from app.schemas.constraints import (ChannelProfiles, ConstraintSpec, FaultSpec, PiecewiseProfile, ProfileSegment, )
from app.schemas.geometry import ChannelGeometry

logger = get_logger(__name__)


def eval_channel(profiles: ChannelProfiles, channel: int, k: int) -> float:
    """Limit of 0-based *channel* at step *k* (override or default)."""
    spec = profiles.channels.get(channel + 1, profiles.default)
    return ProfileRegistry.evaluate(spec, k)


def network_min(download: ChannelProfiles, upload: ChannelProfiles, n: int, k: int) -> float:
    """``c(k)``: the smallest download or upload limit over all channels."""
    return min(min(eval_channel(download, i, k), eval_channel(upload, i, k)) for i in range(n))


def _with_fault(nominal, replacement, fault: FaultSpec) -> PiecewiseProfile:
    segments: list[ProfileSegment] = []
    if fault.start > 0:
        segments.append(ProfileSegment(start=0, profile=nominal))
    segments.append(ProfileSegment(start=fault.start, profile=replacement))
    if fault.end is not None:
        segments.append(ProfileSegment(start=fault.end, profile=nominal))
    return PiecewiseProfile(segments=tuple(segments))


class _Direction:
    """Profiles of one direction, deduplicated by object identity."""

    def __init__(self, specs: list, scale: np.ndarray):
        self.unique: list = []
        positions: dict[int, int] = {}
        index = []
        for spec in specs:
            if id(spec) not in positions:
                positions[id(spec)] = len(self.unique)
                self.unique.append(spec)
            index.append(positions[id(spec)])
        self.index = np.asarray(index, dtype=np.intp)
        self.specs = specs
        self.scale = scale

    def values(self, k: int) -> np.ndarray:
        raw = np.array([ProfileRegistry.evaluate(s, k) for s in self.unique])
        return raw[self.index] * self.scale


class ConstraintField:
    """Download/upload limits ``c_i^D(k)``, ``c_i^U(k)`` for every channel.

    Args:
        spec: Scenario constraint block.
        n: Number of channels.
        geometries: Per-channel geometry (``None`` entries allowed unless
            ``spec.units == "flow"``).
        fault: Optional fault overlay.
    """

    def __init__(self, spec: ConstraintSpec, n: int, geometries: Sequence[ChannelGeometry | None] | None = None,
                 fault: FaultSpec | None = None):
        self.spec = spec
        self.n = n
        self.geometries = list(geometries) if geometries is not None else [None] * n
        self.fault = fault
        self._cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

        if len(self.geometries) != n:
            raise ProfileError(f"Expected {n} channel geometries, got {len(self.geometries)}")

        scale = np.ones(n)
        if spec.units == "flow":
            for i, g in enumerate(self.geometries):
                if g is None:
                    raise ProfileError(f"Flow-unit constraints need a geometry for channel {i + 1}")
                # C/w for C = 1 gives the per-channel factor 1/w
                scale[i] = flow_to_height_limits(g, 1.0, 1.0)[0]

        download = self._resolve(spec.download, fault.download if fault else None, fault)
        upload = self._resolve(spec.upload, fault.upload if fault else None, fault)
        self._download = _Direction(download, scale)
        self._upload = _Direction(upload, scale)
        for direction, resolved in (("download", self._download), ("upload", self._upload)):
            for s in resolved.unique:
                if not math.isfinite(ProfileRegistry.supremum(s)):
                    raise ProfileError(f"The {direction} profile '{s.kind}' has no finite upper bound")

    # ------------------------------------------------------------------
    # Resolution
    # ------------------------------------------------------------------

    def _resolve(self, profiles: ChannelProfiles, replacement, fault: FaultSpec | None) -> list:
        bad = [c for c in profiles.channels if c > self.n]
        if bad:
            raise ProfileError(f"Constraint overrides reference channels {bad}, network has {self.n}")
        specs = [profiles.channels.get(i + 1, profiles.default) for i in range(self.n)]
        if replacement is None:
            return specs

        hit = range(self.n) if fault.channels is None else [c - 1 for c in fault.channels]
        if any(not 0 <= c < self.n for c in hit):
            raise ProfileError(f"Fault references channels outside 1..{self.n}: {fault.channels}")
        wrapped: dict[int, PiecewiseProfile] = {}
        for i in hit:
            nominal = specs[i]
            if id(nominal) not in wrapped:
                wrapped[id(nominal)] = _with_fault(nominal, replacement, fault)
            specs[i] = wrapped[id(nominal)]
        return specs

    def nominal(self) -> "ConstraintField":
        """The same field without its fault overlay."""
        if self.fault is None:
            return self
        return ConstraintField(self.spec, self.n, self.geometries)

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def values(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """``(c_D(k), c_U(k))`` as length-``n`` arrays in height units."""
        if k not in self._cache:
            self._cache[k] = (self._download.values(k), self._upload.values(k))
        return self._cache[k]

    def network_min(self, k: int) -> float:
        c_D, c_U = self.values(k)
        return float(min(c_D.min(), c_U.min()))

    def horizon_min(self, k_max: int) -> float:
        """``min_{0 ≤ k ≤ k_max} c(k)``."""
        return min(self.network_min(k) for k in range(k_max + 1))
