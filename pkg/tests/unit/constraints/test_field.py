"""Tests for the per-channel constraint field, fault overlays and flow units."""

import numpy as np
import pytest
from pydantic import ValidationError

from app.constraints.field import ConstraintField, eval_channel, network_min
from app.constraints.registry import ProfileRegistry
from app.core.errors import ProfileError
from app.schemas.constraints import (
    ChannelProfiles,
    ConstantProfile,
    ConstraintSpec,
    FaultSpec,
    WaveformProfile,
)
from app.schemas.geometry import ChannelGeometry


def _spec(**overrides) -> ConstraintSpec:
    return ConstraintSpec(**overrides)


def _const(v: float) -> ConstantProfile:
    return ConstantProfile(value=v)


# ======================================================================
# Defaults and overrides
# ======================================================================


class TestNominalField:
    def test_defaults(self):
        field = ConstraintField(_spec(), n=3)
        c_D, c_U = field.values(0)
        np.testing.assert_array_equal(c_D, [5.0, 5.0, 5.0])
        np.testing.assert_array_equal(c_U, [0.6825] * 3)
        assert field.network_min(0) == 0.6825

    def test_horizon_min(self):
        assert ConstraintField(_spec(), n=3).horizon_min(100) == 0.6825

    def test_channel_override(self):
        spec = _spec(download=ChannelProfiles(default=_const(5.0), channels={2: _const(0.5)}))
        field = ConstraintField(spec, n=3)
        np.testing.assert_array_equal(field.values(4)[0], [5.0, 0.5, 5.0])
        assert field.network_min(4) == 0.5
        assert eval_channel(spec.download, 1, 4) == 0.5
        assert network_min(spec.download, spec.upload, 3, 4) == 0.5

    def test_override_outside_network(self):
        spec = _spec(upload=ChannelProfiles(default=_const(1.0), channels={7: _const(2.0)}))
        with pytest.raises(ProfileError, match="channels \\[7\\]"):
            ConstraintField(spec, n=3)

    def test_override_keys_are_one_based(self):
        with pytest.raises(ValidationError, match="1-based"):
            ChannelProfiles(default=_const(1.0), channels={0: _const(2.0)})

    def test_values_are_cached(self):
        field = ConstraintField(_spec(), n=4)
        assert field.values(3) is field.values(3)

    @pytest.mark.parametrize("override, fault", [
        ({2: WaveformProfile()}, None),
        ({}, FaultSpec(start=2, end=5, download=WaveformProfile())),
    ])
    def test_unbounded_profile_rejected(self, override, fault, monkeypatch):
        spec = _spec(download=ChannelProfiles(default=_const(5.0)),
                     upload=ChannelProfiles(default=_const(1.0), channels=override))
        monkeypatch.setattr(ProfileRegistry.get_or_raise("waveform"), "supremum", lambda params: float("inf"))
        with pytest.raises(ProfileError, match="no finite upper bound"):
            ConstraintField(spec, n=3, fault=fault)

    def test_bounded_profiles_accepted(self):
        spec = _spec(upload=ChannelProfiles(default=_const(1.0), channels={2: WaveformProfile()}))
        assert ConstraintField(spec, n=3).network_min(0) > 0.0


# ======================================================================
# Fault overlay
# ======================================================================


class TestFault:
    def test_window_on_selected_channels(self):
        fault = FaultSpec(start=10, end=20, upload=_const(0.1), channels=(1,))
        field = ConstraintField(_spec(), n=3, fault=fault)
        nominal = ConstraintField(_spec(), n=3)

        np.testing.assert_array_equal(field.values(9)[1], nominal.values(9)[1])
        c_U = field.values(15)[1]
        assert c_U[0] == 0.1
        np.testing.assert_array_equal(c_U[1:], nominal.values(15)[1][1:])
        np.testing.assert_array_equal(field.values(20)[1], nominal.values(20)[1])
        np.testing.assert_array_equal(field.values(15)[0], [5.0, 5.0, 5.0])

    def test_permanent_fault_from_zero(self):
        fault = FaultSpec(start=0, download=_const(0.2))
        field = ConstraintField(_spec(), n=2, fault=fault)
        np.testing.assert_array_equal(field.values(0)[0], [0.2, 0.2])
        np.testing.assert_array_equal(field.values(500)[0], [0.2, 0.2])

    def test_nominal_drops_fault(self):
        fault = FaultSpec(start=1, end=3, download=_const(0.2))
        field = ConstraintField(_spec(), n=2, fault=fault)
        assert field.nominal().network_min(2) == 0.6825
        assert field.network_min(2) == 0.2

    def test_fault_channels_checked(self):
        fault = FaultSpec(start=1, upload=_const(0.2), channels=(4,))
        with pytest.raises(ProfileError, match="outside"):
            ConstraintField(_spec(), n=3, fault=fault)

    @pytest.mark.parametrize(
        "kwargs, fragment",
        [
            ({"start": 5, "end": 5, "upload": {"kind": "constant", "value": 1.0}}, "after start"),
            ({"start": 5}, "must replace"),
            ({"start": 1, "upload": {"kind": "constant", "value": 1.0}, "channels": [0]}, "1-based"),
        ],
    )
    def test_fault_validation(self, kwargs, fragment):
        with pytest.raises(ValidationError, match=fragment):
            FaultSpec.model_validate(kwargs)


# ======================================================================
# Flow units
# ======================================================================


class TestFlowUnits:
    def test_divides_by_w(self):
        g = ChannelGeometry(L=100.0, b=2.0, h_Z=5.0, h_S=10.0)
        spec = _spec(units="flow",
                     download=ChannelProfiles(default=_const(1000.0)),
                     upload=ChannelProfiles(default=WaveformProfile(amp=1400.0, floor=136.5)))
        field = ConstraintField(spec, n=2, geometries=[g, g])
        flow = ConstraintField(_spec(), n=2)
        for k in (0, 7, 40):
            np.testing.assert_allclose(field.values(k)[0], flow.values(k)[0], rtol=1e-12)
            np.testing.assert_allclose(field.values(k)[1], flow.values(k)[1], rtol=1e-12)

    def test_needs_geometry(self):
        g = ChannelGeometry(L=100.0, b=2.0, h_Z=5.0, h_S=10.0)
        with pytest.raises(ProfileError, match="channel 2"):
            ConstraintField(_spec(units="flow"), n=2, geometries=[g, None])

    def test_geometry_count(self):
        with pytest.raises(ProfileError, match="Expected 3"):
            ConstraintField(_spec(), n=3, geometries=[None])
