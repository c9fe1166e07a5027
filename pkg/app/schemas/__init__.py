"""Pydantic schemas for topologies, constraints, scenarios, traces and reports."""

from app.schemas.constraints import ConstraintSpec, FaultSpec
from app.schemas.report import ConvergenceReport, TopologyReport
from app.schemas.scenario import Scenario
from app.schemas.topology import ChannelTopology, JunctionTopology
from app.schemas.trace import RunTrace, TraceRow

__all__ = [
    "ChannelTopology",
    "ConstraintSpec",
    "ConvergenceReport",
    "FaultSpec",
    "JunctionTopology",
    "RunTrace",
    "Scenario",
    "TopologyReport",
    "TraceRow",
]
