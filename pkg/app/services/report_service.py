"""
Report service.

Builds the topology report of a resolved scenario and writes run artifacts:

- ``trace.csv``: one row per protocol step, 17 significant digits;
- ``report.json``: the :class:`ConvergenceReport` of the primary engine;
- ``scenario.resolved.json``: the scenario exactly as it was run.

Compare mode additionally writes ``trace.distributed.csv`` and
``report.distributed.json``.
"""

from __future__ import annotations

from pathlib import Path

from app.core.config import settings
from app.core.errors import ScenarioError
from app.core.logging import get_logger
from app.ocn.analysis import rate_bounds, topology_constants
from app.ocn.graph import adjoint_edge_count
from app.ocn.weights import xi_bounds
from app.schemas.report import ConvergenceReport, TopologyReport
from app.schemas.scenario import Scenario
from app.schemas.trace import RunTrace
from app.services.scenario_service import ResolvedScenario, RunOutcome, dump_scenario

logger = get_logger(__name__)


def build_topology_report(r: ResolvedScenario) -> TopologyReport:
    """Topological and spectral constants; ``η_H`` and ``r̄``/``r̲`` only when an initial state is known."""
    ct, sp = r.topology, r.spectral
    xi_lower, xi_upper = xi_bounds(ct, r.weights)
    consts = topology_constants(ct)
    r_lower = r_upper = None
    if r.eta_H is not None:
        r_lower, r_upper = rate_bounds(r.eta_H, xi_lower, xi_upper, ct.rho)

    return TopologyReport(
        m=r.junctions.m,
        n=ct.n,
        adjoint_edges=adjoint_edge_count(r.junctions),
        lambda_1=sp.lambda_1,
        lambda_n_minus_1=sp.lambda_n_minus_1,
        varsigma_P=sp.varsigma_P,
        eta_star=sp.eta_star,
        eta_L=sp.eta_L,
        eta_L_is_zeta=sp.eta_star <= 0.0,
        eta_H=r.eta_H,
        d_m=ct.d_m,
        d_M=ct.d_M,
        omega=r.omega,
        xi_lower=xi_lower,
        xi_upper=xi_upper,
        rho=ct.rho,
        phi=ct.phi,
        R=consts["R"],
        R_hat=consts["R_hat"],
        r_hat=consts["r_hat"],
        r_upper=r_upper,
        r_lower=r_lower,
        static_rate_at_eta_L=sp.static_rate_at_eta_L,
    )


# ======================================================================
# Artifact writers
# ======================================================================


def write_trace_csv(trace: RunTrace, path: Path) -> None:
    trace.to_frame().to_csv(path, index=False, float_format=settings.CSV_FLOAT_FORMAT, lineterminator="\n")


def write_report_json(report: ConvergenceReport, path: Path) -> None:
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")


def write_artifacts(outcome: RunOutcome, scenario: Scenario, out_dir: str | Path) -> list[Path]:
    """Write every artifact of *outcome* into *out_dir* (created if needed).

    Returns:
        The paths written, primary engine first.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written: list[Path] = []
        primary = outcome.primary
        for engine, trace in outcome.traces.items():
            suffix = "" if engine == primary else f".{engine}"
            trace_path = out / f"trace{suffix}.csv"
            report_path = out / f"report{suffix}.json"
            write_trace_csv(trace, trace_path)
            write_report_json(outcome.reports[engine], report_path)
            written += [trace_path, report_path]

        resolved_path = out / "scenario.resolved.json"
        resolved_path.write_text(dump_scenario(scenario.model_copy(update={"mode": outcome.mode})) + "\n",
                                 encoding="utf-8")
        written.append(resolved_path)
    except OSError as e:
        raise ScenarioError(f"Cannot write artifacts to {out}: {e}") from e

    for p in written:
        logger.info("Wrote %s", p)
    return written
