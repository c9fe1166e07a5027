"""Scenario orchestration and artifact services."""

from app.services.scenario_service import ScenarioService

__all__ = ["ScenarioService"]
