"""Tests for the command-line entry point."""

import json
from pathlib import Path

import pytest

from app.cli import EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK, main
from app.core.config import settings

SCENARIOS = Path(__file__).resolve().parents[2] / "scenarios"


@pytest.fixture
def short_run(tmp_path) -> Path:
    doc = json.loads((SCENARIOS / "complete22.json").read_text())
    doc["k_max"] = 1
    path = tmp_path / "short.json"
    path.write_text(json.dumps(doc))
    return path


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == f"ocn-rgp {settings.VERSION}"


class TestReportTopology:
    def test_text(self, capsys):
        assert main(["report-topology", "--scenario", str(SCENARIOS / "synthetic_sparse.json")]) == EXIT_OK
        out = capsys.readouterr().out
        assert "channels n" in out
        assert "25" in out

    def test_json(self, capsys):
        assert main(["report-topology", "--scenario", str(SCENARIOS / "complete22.json"), "--json"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["n"] == 231
        assert report["adjoint_edges"] == 4620


class TestRun:
    def test_converged(self, tmp_path):
        out = tmp_path / "out"
        code = main(["run", "--scenario", str(SCENARIOS / "synthetic_sparse.json"), "--out", str(out), "--seed", "3"])
        assert code == EXIT_OK
        assert {p.name for p in out.iterdir()} == {"trace.csv", "report.json", "scenario.resolved.json"}
        resolved = json.loads((out / "scenario.resolved.json").read_text())
        assert resolved["init"]["seed"] == 3

    def test_not_converged_still_writes(self, tmp_path, short_run):
        out = tmp_path / "out"
        assert main(["run", "--scenario", str(short_run), "--out", str(out)]) == EXIT_NOT_CONVERGED
        report = json.loads((out / "report.json").read_text())
        assert report["status"] == "not_converged"

    def test_distributed_mode(self, tmp_path):
        out = tmp_path / "out"
        code = main(["run", "--scenario", str(SCENARIOS / "synthetic_sparse.json"), "--out", str(out),
                     "--mode", "distributed"])
        assert code == EXIT_OK
        assert json.loads((out / "report.json").read_text())["engine"] == "distributed"

    def test_compare(self, tmp_path):
        out = tmp_path / "out"
        assert main(["compare", "--scenario", str(SCENARIOS / "synthetic_sparse.json"), "--out", str(out)]) == EXIT_OK
        assert (out / "trace.distributed.csv").exists()


class TestErrors:
    def test_invalid_scenario(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"topology": {"kind": "cycle", "m": 6}, "gama": 0.5}))
        assert main(["report-topology", "--scenario", str(path)]) == EXIT_ERROR

    def test_missing_file(self, tmp_path):
        assert main(["report-topology", "--scenario", str(tmp_path / "none.json")]) == EXIT_ERROR

    def test_seed_on_explicit_init(self, tmp_path):
        code = main(["run", "--scenario", str(SCENARIOS / "geometry_flow.json"), "--out", str(tmp_path),
                     "--seed", "1"])
        assert code == EXIT_ERROR

    def test_run_without_init(self, tmp_path):
        path = tmp_path / "noinit.json"
        path.write_text(json.dumps({"topology": {"kind": "cycle", "m": 6}}))
        assert main(["run", "--scenario", str(path), "--out", str(tmp_path / "out")]) == EXIT_ERROR
