"""Tests for the constraint-profile kinds and their registry."""

import math

import pytest
from pydantic import ValidationError

from app.constraints import ProfileRegistry
from app.constraints.base import ProfileKind
from app.constraints.constant import ConstantKind
from app.constraints.waveform import waveform_value
from app.core.errors import ProfileError
from app.schemas.constraints import (
    ConstantProfile,
    PiecewiseProfile,
    ProfileSegment,
    WaveformProfile,
)


def _piecewise(*pairs) -> PiecewiseProfile:
    return PiecewiseProfile(segments=tuple(ProfileSegment(start=s, profile=p) for s, p in pairs))


# ======================================================================
# Registry
# ======================================================================


class TestProfileRegistry:
    def test_builtin_kinds(self):
        assert ProfileRegistry.available_kind_ids() == ["constant", "piecewise", "waveform"]

    def test_kinds_implement_interface(self):
        for kind in map(ProfileRegistry.get_or_raise, ProfileRegistry.available_kind_ids()):
            assert isinstance(kind, ProfileKind)
            assert kind.params_schema.model_fields["kind"].default == kind.kind_id

    def test_unknown_kind(self):
        with pytest.raises(KeyError, match="Available"):
            ProfileRegistry.get_or_raise("ramp")

    def test_duplicate_registration(self):
        with pytest.raises(ValueError, match="already registered"):
            ProfileRegistry.register(ConstantKind())

    def test_negative_step(self):
        with pytest.raises(ProfileError, match="k >= 0"):
            ProfileRegistry.evaluate(ConstantProfile(value=1.0), -1)

    def test_non_positive_value(self):
        with pytest.raises(ProfileError, match="positive"):
            ProfileRegistry.evaluate(ConstantProfile.model_construct(kind="constant", value=0.0), 0)


# ======================================================================
# Constant
# ======================================================================


class TestConstant:
    def test_value(self):
        spec = ConstantProfile(value=5.0)
        assert ProfileRegistry.evaluate(spec, 0) == 5.0
        assert ProfileRegistry.evaluate(spec, 99) == 5.0
        assert ProfileRegistry.supremum(spec) == 5.0

    def test_rejects_zero(self):
        with pytest.raises(ValidationError):
            ConstantProfile(value=0.0)


# ======================================================================
# Waveform
# ======================================================================


class TestWaveform:
    def test_literal_start(self):
        assert waveform_value(7.0, 0.95, 10.0, 0) == pytest.approx(0.0175, abs=1e-12)

    def test_default_floor(self):
        spec = WaveformProfile()
        assert spec.floor == 0.6825
        assert ProfileRegistry.evaluate(spec, 0) == 0.6825

    def test_literal_mode(self):
        spec = WaveformProfile(floor=0.0)
        assert ProfileRegistry.evaluate(spec, 0) == pytest.approx(0.0175, abs=1e-12)

    def test_bounded_by_amplitude(self):
        spec = WaveformProfile()
        values = [ProfileRegistry.evaluate(spec, k) for k in range(500)]
        assert min(values) == 0.6825
        assert max(values) <= 7.0
        assert values[-1] > 6.0

    def test_matches_expression(self):
        k = 17
        ramp = 0.95 ** (k + 1)
        expected = 7.0 * (1 - ramp) * (1 - ramp * abs(math.cos(k / 10.0)))
        assert waveform_value(7.0, 0.95, 10.0, k) == pytest.approx(expected)

    @pytest.mark.parametrize("field, value", [("decay", 1.0), ("decay", 0.0), ("amp", -1.0), ("period", 0.0)])
    def test_parameter_ranges(self, field, value):
        with pytest.raises(ValidationError):
            WaveformProfile(**{field: value})


# ======================================================================
# Piecewise
# ======================================================================


class TestPiecewise:
    def test_switches_at_start(self):
        spec = _piecewise((0, ConstantProfile(value=5.0)), (10, ConstantProfile(value=1.0)))
        assert ProfileRegistry.evaluate(spec, 9) == 5.0
        assert ProfileRegistry.evaluate(spec, 10) == 1.0
        assert ProfileRegistry.evaluate(spec, 1000) == 1.0

    def test_nested(self):
        inner = _piecewise((0, ConstantProfile(value=2.0)), (5, ConstantProfile(value=3.0)))
        spec = _piecewise((0, ConstantProfile(value=1.0)), (3, inner))
        assert [ProfileRegistry.evaluate(spec, k) for k in (0, 3, 4, 5, 6)] == [1.0, 2.0, 2.0, 3.0, 3.0]

    def test_segment_keeps_global_step(self):
        spec = _piecewise((0, ConstantProfile(value=1.0)), (20, WaveformProfile(floor=0.0)))
        assert ProfileRegistry.evaluate(spec, 20) == pytest.approx(waveform_value(7.0, 0.95, 10.0, 20))

    def test_supremum(self):
        spec = _piecewise((0, ConstantProfile(value=5.0)), (10, WaveformProfile()))
        assert ProfileRegistry.supremum(spec) == 7.0

    def test_first_segment_must_start_at_zero(self):
        with pytest.raises(ValidationError, match="step 0"):
            _piecewise((1, ConstantProfile(value=1.0)))

    def test_starts_strictly_increasing(self):
        with pytest.raises(ValidationError, match="strictly increasing"):
            _piecewise((0, ConstantProfile(value=1.0)), (4, ConstantProfile(value=2.0)),
                       (4, ConstantProfile(value=3.0)))

    def test_parses_from_json(self):
        text = '{"kind": "piecewise", "segments": [{"start": 0, "profile": {"kind": "constant", "value": 2}}]}'
        spec = PiecewiseProfile.model_validate_json(text)
        assert ProfileRegistry.evaluate(spec, 3) == 2.0
