"""Tests for scenario parsing, resolution and the run modes."""

import json
from pathlib import Path

import numpy as np
import pytest

from app.core.errors import ScenarioError, TopologyError
from app.ocn.graph import complete_topology, path_topology
from app.schemas.scenario import RandomInit
from app.services.scenario_service import (
    ScenarioService,
    compare_traces,
    dump_scenario,
    embed_into_complete,
    load_scenario,
    parse_scenario,
    random_initial_state,
    scenario_seed,
    with_seed,
)

SCENARIOS = Path(__file__).resolve().parents[3] / "scenarios"
SHIPPED = sorted(SCENARIOS.glob("*.json"))


def _scenario(**overrides) -> str:
    doc = {"topology": {"kind": "cycle", "m": 6}, "init": {"kind": "random", "seed": 1}}
    doc.update(overrides)
    return json.dumps(doc)


# ======================================================================
# Parsing
# ======================================================================


class TestParseScenario:
    def test_minimal_defaults(self):
        s = parse_scenario(_scenario())
        assert (s.gamma, s.zeta, s.k_max, s.sampling_period) == (0.6, 0.001, 100, 1.0)
        assert s.mode == "centralized"
        assert s.detrend_mode == "exact"
        assert s.constraints.download.default.value == 5.0
        assert s.constraints.upload.default.kind == "waveform"
        assert s.init.target_inf_norm == 4.64

    def test_unknown_key_named(self):
        with pytest.raises(ScenarioError, match="foo"):
            parse_scenario(_scenario(foo=1))

    def test_nested_unknown_key_path(self):
        with pytest.raises(ScenarioError, match="init.random.bar"):
            parse_scenario(_scenario(init={"kind": "random", "bar": 2}))

    @pytest.mark.parametrize("key, value", [("gamma", 0.0), ("gamma", -1.0), ("zeta", 0.0), ("zeta", 1.0)])
    def test_rejects_out_of_range(self, key, value):
        with pytest.raises(ScenarioError, match=key):
            parse_scenario(_scenario(**{key: value}))

    def test_unknown_topology_kind(self):
        with pytest.raises(ScenarioError, match="topology"):
            parse_scenario(_scenario(topology={"kind": "grid", "m": 4}))

    def test_not_json(self):
        with pytest.raises(ScenarioError):
            parse_scenario("topology: complete")

    @pytest.mark.parametrize("path", SHIPPED, ids=[p.stem for p in SHIPPED])
    def test_shipped_round_trip(self, path):
        s = load_scenario(path)
        assert parse_scenario(dump_scenario(s)) == s

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError, match="Cannot read"):
            load_scenario(tmp_path / "nope.json")


# ======================================================================
# Seeds
# ======================================================================


class TestSeeds:
    def test_with_seed_random(self):
        s = with_seed(parse_scenario(_scenario()), 42)
        assert scenario_seed(s) == 42

    def test_with_seed_embedded(self):
        s = load_scenario(SCENARIOS / "complete22_paired.json")
        assert scenario_seed(with_seed(s, 9)) == 9

    def test_with_seed_needs_random_init(self):
        s = parse_scenario(_scenario(init={"kind": "explicit", "values": [1, 2, 3, 4, 5, 6]}))
        assert scenario_seed(s) is None
        with pytest.raises(ScenarioError, match="random"):
            with_seed(s, 1)


# ======================================================================
# Initial states
# ======================================================================


class TestInitialStates:
    def test_random_scaled_and_centred(self):
        x = random_initial_state(25, RandomInit(seed=3))
        assert np.max(np.abs(x)) == pytest.approx(4.64, abs=1e-12)
        assert np.mean(x) == pytest.approx(0.0, abs=1e-12)

    def test_random_deterministic(self):
        a = random_initial_state(10, RandomInit(seed=3))
        np.testing.assert_array_equal(a, random_initial_state(10, RandomInit(seed=3)))
        assert not np.array_equal(a, random_initial_state(10, RandomInit(seed=4)))

    def test_random_without_centring(self):
        x = random_initial_state(10, RandomInit(seed=3, zero_mean=False, target_inf_norm=1.0))
        expected = np.random.default_rng(3).uniform(-1.0, 1.0, size=10)
        np.testing.assert_allclose(x, expected / np.max(np.abs(expected)))

    def test_embed_into_complete(self):
        x = embed_into_complete(path_topology(4), np.array([1.0, 2.0, 3.0]), complete_topology(4))
        np.testing.assert_array_equal(x, [1.0, 0.0, 0.0, 2.0, 0.0, 3.0])

    def test_embed_needs_matching_complete_graph(self):
        with pytest.raises(ScenarioError, match="complete\\(4\\)"):
            embed_into_complete(path_topology(4), np.zeros(3), complete_topology(5))

    def test_explicit_length_checked(self):
        s = parse_scenario(_scenario(init={"kind": "explicit", "values": [1.0, 2.0]}))
        with pytest.raises(ScenarioError, match="2 entries"):
            ScenarioService(s).resolve()


# ======================================================================
# Resolution
# ======================================================================


class TestResolve:
    def test_edges_topology_is_one_based(self):
        s = parse_scenario(_scenario(topology={"kind": "edges", "edges": [[1, 2], [2, 3], [3, 1]]},
                                     init={"kind": "explicit", "values": [1, 0, -1]}))
        r = ScenarioService(s).resolve()
        assert r.junctions.channel_edges == ((0, 1), (1, 2), (0, 2))
        assert r.topology.n == 3

    def test_file_topology_relative_to_scenario(self):
        r = ScenarioService.from_file(SCENARIOS / "synthetic_sparse.json").resolve()
        assert (r.junctions.m, r.topology.n) == (22, 25)

    def test_invalid_topology_propagates(self):
        s = parse_scenario(_scenario(topology={"kind": "edges", "edges": [[1, 2], [3, 4]]}))
        with pytest.raises(TopologyError, match="disconnected"):
            ScenarioService(s).resolve()

    def test_eta_H_needs_init(self):
        s = parse_scenario(json.dumps({"topology": {"kind": "cycle", "m": 6}}))
        r = ScenarioService(s).resolve()
        assert r.eta_H is None
        assert r.detrended is None

    def test_consensus_detrend(self):
        s = parse_scenario(_scenario(detrend_mode="consensus",
                                     init={"kind": "explicit", "values": [4, 1, 0, 2, 3, 8]}))
        r = ScenarioService(s).resolve()
        assert r.detrended.mode == "consensus"
        assert r.detrended.alpha == pytest.approx(3.0, abs=1e-9)
        np.testing.assert_allclose(r.detrended.x0, [1, -2, -3, -1, 0, 5], atol=1e-8)

    def test_geometry_resolution(self):
        r = ScenarioService.from_file(SCENARIOS / "geometry_flow.json").resolve()
        assert r.geometries[0].is_rectangular
        assert not r.geometries[2].is_rectangular
        c_D, _ = r.field.values(0)
        assert c_D[0] == pytest.approx(5.0)
        assert c_D[2] == pytest.approx(1000.0 / r.geometries[2].w)

    def test_geometry_channel_outside_network(self):
        geometry = {"channels": {"9": {"L": 1.0, "b": 1.0, "h_Z": 0.5, "h_S": 1.0}}}
        s = parse_scenario(_scenario(geometry=geometry))
        with pytest.raises(ScenarioError, match="\\[9\\]"):
            ScenarioService(s).resolve()


# ======================================================================
# Running
# ======================================================================


class TestRun:
    def test_needs_init(self):
        s = parse_scenario(json.dumps({"topology": {"kind": "cycle", "m": 6}}))
        with pytest.raises(ScenarioError, match="init"):
            ScenarioService(s).run()

    def test_centralized(self):
        outcome = ScenarioService(parse_scenario(_scenario())).run()
        assert list(outcome.traces) == ["centralized"]
        assert outcome.exit_code == 0
        assert outcome.reports["centralized"].seed == 1

    def test_not_converged_exit_code(self):
        outcome = ScenarioService(parse_scenario(_scenario(k_max=1))).run()
        assert outcome.exit_code == 2
        assert outcome.reports["centralized"].status == "not_converged"

    def test_distributed_mode(self):
        outcome = ScenarioService(parse_scenario(_scenario(workers=2))).run("distributed")
        assert outcome.primary == "distributed"
        assert outcome.traces["distributed"].mcp_messages.sum() > 0

    def test_compare(self):
        outcome = ScenarioService(parse_scenario(_scenario(mode="compare"))).run()
        assert outcome.compare_ok
        assert outcome.exit_code == 0
        for report in outcome.reports.values():
            assert report.compare_max_deviation <= 1e-12
            assert report.compare_eta_max_deviation <= 1e-12

    def test_compare_traces_length_mismatch(self):
        a = ScenarioService(parse_scenario(_scenario())).run().traces["centralized"]
        b = ScenarioService(parse_scenario(_scenario(k_max=1))).run().traces["centralized"]
        assert compare_traces(a, b) == (float("inf"), float("inf"))

    def test_geometry_report(self):
        outcome = ScenarioService.from_file(SCENARIOS / "geometry_flow.json").run()
        report = outcome.reports["centralized"]
        assert report.status == "converged"
        assert report.within_height_bounds is True
        assert report.rebased_references == pytest.approx([5.0, 5.0, 4.0, 5.0, 5.0, 5.0])
        assert report.constraint_violations == 0

    @pytest.mark.parametrize(
        "values, admissible",
        [([0.9, 0.9, 0.9, -0.9], True), ([-0.9, -0.9, -0.9, 0.9], True), ([0.5, 0.5, 0.5, 1.5], False)],
    )
    def test_height_range_uses_raw_levels(self, values, admissible, caplog):
        geometry = {"default": {"L": 10.0, "b": 1.0, "h_Z": 1.0, "h_S": 2.0}}
        s = parse_scenario(_scenario(topology={"kind": "path", "m": 5}, geometry=geometry,
                                     init={"kind": "explicit", "values": values}))
        with caplog.at_level("WARNING"):
            report = ScenarioService(s).run().reports["centralized"]
        assert report.alpha == pytest.approx(np.mean(values))
        assert report.within_height_bounds is admissible
        assert ("outside its height range" in caplog.text) is not admissible

    def test_fault_scenario(self):
        faulted = ScenarioService.from_file(SCENARIOS / "fault.json").run().reports["centralized"]
        nominal = ScenarioService(load_scenario(SCENARIOS / "fault.json").model_copy(update={"fault": None}),
                                  base_dir=SCENARIOS).run().reports["centralized"]
        assert faulted.status == "converged"
        assert faulted.constraint_violations == 0
        assert nominal.k_bar is None or faulted.k_bar >= nominal.k_bar

    def test_complete_faster_than_sparse(self):
        def k_bars(name: str) -> list[int]:
            base = ScenarioService.from_file(SCENARIOS / name)
            out = []
            for seed in range(20):
                trace = ScenarioService(with_seed(base.scenario, seed), base_dir=SCENARIOS).run().traces["centralized"]
                out.append(trace.k_bar if trace.converged else trace.k_max + 1)
            return out

        assert np.median(k_bars("complete22_paired.json")) < np.median(k_bars("synthetic_sparse.json"))

    @pytest.mark.parametrize("path", SHIPPED, ids=[p.stem for p in SHIPPED])
    def test_shipped_scenarios_run(self, path):
        outcome = ScenarioService.from_file(path).run()
        assert outcome.exit_code in (0, 2)
