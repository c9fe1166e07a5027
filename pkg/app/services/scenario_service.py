"""
Scenario service.

Turns a :class:`Scenario` into the objects the algorithms need (topology,
weights, constraint field, detrended initial state) and runs it in
centralized, distributed or compare mode.  Writing the artifacts is left to
:mod:`app.services.report_service`.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.constraints.field import ConstraintField
from app.core.errors import ScenarioError
from app.core.logging import get_logger
from app.ocn.analysis import build_convergence_report
from app.ocn.distributed import DistributedSimulator, SimulatorConfig
from app.ocn.graph import (build_line_graph, complete_topology, cycle_topology, junction_topology, load_edge_list,
                           path_topology, star_topology)
from app.ocn.rgp import RgpConfig, consensus_detrend, detrend, eta_H_bound, rgp_run
from app.ocn.weights import build_mh_weights, omega_bound, spectral_summary
from app.schemas.geometry import ChannelGeometry
from app.schemas.report import ConvergenceReport
from app.schemas.rgp import DetrendResult
from app.schemas.scenario import (CompleteTopology, CycleTopology, EdgesTopology, EmbedIntoCompleteInit,
                                  ExplicitInit, FileTopology, GeometrySpec, PathTopology, RandomInit, Scenario,
                                  StarTopology)
from app.schemas.topology import ChannelTopology, JunctionTopology
from app.schemas.trace import RunTrace
from app.schemas.weights import ConsensusWeights, SpectralSummary

logger = get_logger(__name__)

COMPARE_TOL = 1e-12

# ======================================================================
# Parsing
# ======================================================================


def _format_validation_error(e: ValidationError) -> str:
    lines = []
    for err in e.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "; ".join(lines)


def parse_scenario(text: str) -> Scenario:
    """Parse a JSON scenario, filling every default.

    Raises:
        ScenarioError: Listing every failing key path.
    """
    try:
        return Scenario.model_validate_json(text)
    except ValidationError as e:
        raise ScenarioError(f"Invalid scenario: {_format_validation_error(e)}") from e


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario {path}: {e}") from e
    return parse_scenario(text)


def dump_scenario(scenario: Scenario) -> str:
    return scenario.model_dump_json(indent=2)


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    """Copy of *scenario* whose random initial state uses *seed*."""
    init = scenario.init
    if isinstance(init, RandomInit):
        init = init.model_copy(update={"seed": seed})
    elif isinstance(init, EmbedIntoCompleteInit) and isinstance(init.source_init, RandomInit):
        init = init.model_copy(update={"source_init": init.source_init.model_copy(update={"seed": seed})})
    else:
        raise ScenarioError("--seed needs a random initial state")
    return scenario.model_copy(update={"init": init})


def scenario_seed(scenario: Scenario) -> int | None:
    init = scenario.init
    if isinstance(init, RandomInit):
        return init.seed
    if isinstance(init, EmbedIntoCompleteInit) and isinstance(init.source_init, RandomInit):
        return init.source_init.seed
    return None


# ======================================================================
# Resolution helpers
# ======================================================================


def resolve_topology(spec, base_dir: Path) -> JunctionTopology:
    """Build the junction graph named by a topology block."""
    match spec:
        case EdgesTopology(edges=edges, m=m, labels=labels):
            if any(a < 1 or b < 1 for a, b in edges):
                raise ScenarioError("topology.edges: junction indices are 1-based")
            size = m if m is not None else max(max(e) for e in edges)
            return junction_topology(size, [(a - 1, b - 1) for a, b in edges], labels)
        case CompleteTopology(m=m):
            return complete_topology(m)
        case PathTopology(m=m):
            return path_topology(m)
        case StarTopology(m=m):
            return star_topology(m)
        case CycleTopology(m=m):
            return cycle_topology(m)
        case FileTopology(path=path, m=m):
            p = Path(path)
            return load_edge_list(p if p.is_absolute() else base_dir / p, m)
    raise ScenarioError(f"Unsupported topology block {spec!r}")


def resolve_geometries(spec: GeometrySpec | None, n: int) -> list[ChannelGeometry | None] | None:
    if spec is None:
        return None
    bad = [c for c in spec.channels if c > n]
    if bad:
        raise ScenarioError(f"geometry.channels references channels {bad}, network has {n}")
    return [spec.channels.get(i + 1, spec.default) for i in range(n)]


def random_initial_state(n: int, init: RandomInit) -> np.ndarray:
    """Uniform ``[-1, 1]^n`` from ``default_rng(seed)``, optionally detrended, scaled to the target sup-norm."""
    rng = np.random.default_rng(init.seed)
    x = rng.uniform(-1.0, 1.0, size=n)
    if init.zero_mean:
        x = x - np.mean(x)
    peak = float(np.max(np.abs(x)))
    if peak == 0.0:
        raise ScenarioError("Random initial state is identically zero")
    return x * (init.target_inf_norm / peak)


def embed_into_complete(source: JunctionTopology, x_source: np.ndarray, target: JunctionTopology) -> np.ndarray:
    """Copy a sparse network's state onto the complete network over the same junctions.

    Raises:
        ScenarioError: When *target* is not ``K_m`` for the source's ``m``.
    """
    m = source.m
    if target.m != m or target.n != m * (m - 1) // 2:
        raise ScenarioError(f"embed_into_complete needs topology complete({m}), got m={target.m}, n={target.n}")
    index = {pair: i for i, pair in enumerate(target.channel_edges)}
    x = np.zeros(target.n)
    for value, pair in zip(x_source, source.channel_edges):
        x[index[pair]] = value
    return x


def _initial_state(init, jt: JunctionTopology, base_dir: Path) -> np.ndarray:
    match init:
        case ExplicitInit(values=values):
            if len(values) != jt.n:
                raise ScenarioError(f"init.values has {len(values)} entries, network has {jt.n} channels")
            return np.asarray(values, dtype=float)
        case RandomInit():
            return random_initial_state(jt.n, init)
        case EmbedIntoCompleteInit(source=source, source_init=source_init):
            src = resolve_topology(source, base_dir)
            return embed_into_complete(src, _initial_state(source_init, src, base_dir), jt)
    raise ScenarioError(f"Unsupported init block {init!r}")


# ======================================================================
# Resolved scenario and outcome
# ======================================================================


class ResolvedScenario(BaseModel):
    """A scenario with every derived object built."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    scenario: Scenario
    junctions: JunctionTopology
    topology: ChannelTopology
    weights: ConsensusWeights
    spectral: SpectralSummary
    omega: float
    geometries: list[ChannelGeometry | None] | None = None
    field: ConstraintField
    x0_raw: np.ndarray | None = None
    detrended: DetrendResult | None = None
    eta_H: float | None = None
    seed: int | None = None

    @property
    def rgp_config(self) -> RgpConfig:
        s = self.scenario
        return RgpConfig(gamma=s.gamma, k_max=s.k_max, zeta=s.zeta)

    @property
    def sim_config(self) -> SimulatorConfig:
        return SimulatorConfig(workers=self.scenario.workers,
                               precomputed_constraints=self.scenario.precomputed_constraints)


class RunOutcome(BaseModel):
    """Traces and reports of one CLI invocation, keyed by engine."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    mode: str
    traces: dict[str, RunTrace] = Field(default_factory=dict)
    reports: dict[str, ConvergenceReport] = Field(default_factory=dict)
    compare_ok: bool | None = None

    @property
    def primary(self) -> str:
        return "distributed" if self.mode == "distributed" else "centralized"

    @property
    def exit_code(self) -> int:
        if self.compare_ok is False:
            return 1
        return 0 if self.traces[self.primary].converged else 2


# ======================================================================
# Service
# ======================================================================


class ScenarioService:
    """Resolves and runs one scenario.

    Args:
        scenario: Parsed scenario.
        base_dir: Directory relative file paths in the scenario resolve against.
    """

    def __init__(self, scenario: Scenario, base_dir: str | Path | None = None):
        self.scenario = scenario
        self.base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
        self._resolved: ResolvedScenario | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "ScenarioService":
        path = Path(path)
        return cls(load_scenario(path), base_dir=path.parent)

    # ------------------------------------------------------------------
    # Resolution
    # ------------------------------------------------------------------

    def resolve(self) -> ResolvedScenario:
        if self._resolved is None:
            self._resolved = self._resolve()
        return self._resolved

    def _resolve(self) -> ResolvedScenario:
        s = self.scenario
        jt = resolve_topology(s.topology, self.base_dir)
        ct = build_line_graph(jt)
        w = build_mh_weights(ct)
        spectral = spectral_summary(w, s.zeta)
        omega = omega_bound(ct, w)
        geometries = resolve_geometries(s.geometry, ct.n)
        field = ConstraintField(s.constraints, ct.n, geometries, s.fault)
        logger.info("Scenario %r: m=%d junctions, n=%d channels, d=%d/%d, rho=%d, phi=%d, eta_L=%.6g",
                    s.name, jt.m, ct.n, ct.d_m, ct.d_M, ct.rho, ct.phi, spectral.eta_L)

        x0_raw = detrended = eta_H = None
        if s.init is not None:
            x0_raw = _initial_state(s.init, jt, self.base_dir)
            detrended = detrend(x0_raw) if s.detrend_mode == "exact" else consensus_detrend(x0_raw, w)
            c_min = field.nominal().horizon_min(s.k_max)
            eta_H = eta_H_bound(float(np.max(np.abs(detrended.x0))), c_min, omega, spectral.eta_L)
            self._check_initial_range(detrended.x0, detrended.alpha, geometries)

        return ResolvedScenario(scenario=s, junctions=jt, topology=ct, weights=w, spectral=spectral, omega=omega,
                                geometries=geometries, field=field, x0_raw=x0_raw, detrended=detrended,
                                eta_H=eta_H, seed=scenario_seed(s))

    @staticmethod
    def _check_initial_range(x0: np.ndarray, alpha: float, geometries: list[ChannelGeometry | None] | None) -> bool:
        """Warn about channels whose raw start ``x0 + alpha`` lies outside ``[-h_Z, h_S - h_Z]``."""
        if geometries is None:
            return True
        ok = True
        for i, g in enumerate(geometries):
            raw = x0[i] + alpha
            if g is not None and not g.x_lower <= raw <= g.x_upper:
                logger.warning("Channel %d starts at %.6g, outside its height range [%.6g, %.6g]",
                               i + 1, raw, g.x_lower, g.x_upper)
                ok = False
        return ok

    # ------------------------------------------------------------------
    # Running
    # ------------------------------------------------------------------

    def _run_engine(self, r: ResolvedScenario, engine: str) -> RunTrace:
        if engine == "centralized":
            return rgp_run(r.detrended.x0, r.weights, r.field, r.rgp_config, r.spectral.eta_L, r.omega)
        simulator = DistributedSimulator(r.weights, r.field, r.rgp_config, r.sim_config, r.spectral.eta_L, r.omega)
        return simulator.run(r.detrended.x0)

    def _report(self, r: ResolvedScenario, trace: RunTrace) -> ConvergenceReport:
        report = build_convergence_report(trace, r.weights, r.spectral.eta_L, r.eta_H, self.scenario.name,
                                          seed=r.seed, alpha=r.detrended.alpha, geometries=r.geometries)
        if report.eta_bound_exceeded:
            logger.warning("eta exceeded eta_H=%.6g at %d step(s); max %.6g",
                           r.eta_H, len(report.eta_exceedance_steps), report.eta_max_observed)
        if not report.contraction.satisfied:
            logger.warning("Contraction bound r_upper=%.6g violated at steps %s",
                           report.contraction.r_upper, report.contraction.violations)
        if report.constraint_violations:
            logger.warning("%d constraint violation(s), max excess %.3e",
                           report.constraint_violations, report.max_constraint_excess)
        return report

    def run(self, mode: str | None = None) -> RunOutcome:
        """Run the scenario; *mode* overrides the scenario's own."""
        mode = mode or self.scenario.mode
        r = self.resolve()
        if r.detrended is None:
            raise ScenarioError("Scenario has no init block; run and compare need an initial state")

        engines = ["centralized", "distributed"] if mode == "compare" else [mode]
        outcome = RunOutcome(mode=mode)
        for engine in engines:
            trace = self._run_engine(r, engine)
            outcome.traces[engine] = trace
            outcome.reports[engine] = self._report(r, trace)

        if mode == "compare":
            dev_x, dev_eta = compare_traces(outcome.traces["centralized"], outcome.traces["distributed"])
            for report in outcome.reports.values():
                report.compare_max_deviation = dev_x
                report.compare_eta_max_deviation = dev_eta
            outcome.compare_ok = dev_x <= COMPARE_TOL and dev_eta <= COMPARE_TOL
            if outcome.compare_ok:
                logger.info("Engines agree: max |dx| = %.3e, max |d eta| = %.3e", dev_x, dev_eta)
            else:
                logger.error("Engines differ: max |dx| = %.3e, max |d eta| = %.3e (tolerance %.0e)",
                             dev_x, dev_eta, COMPARE_TOL)
        return outcome


def compare_traces(a: RunTrace, b: RunTrace) -> tuple[float, float]:
    """Sup-norm deviation of states and of ``η`` between two traces (``inf`` when lengths differ)."""
    if a.x.shape != b.x.shape or a.eta.shape != b.eta.shape:
        return float("inf"), float("inf")
    dev_x = float(np.max(np.abs(a.x - b.x))) if a.x.size else 0.0
    dev_eta = float(np.max(np.abs(a.eta - b.eta))) if a.eta.size else 0.0
    return dev_x, dev_eta
