"""
Command-line interface.

Usage:
    python -m app report-topology --scenario F [--json]
    python -m app run --scenario F --out D [--seed S] [--mode M]
    python -m app compare --scenario F --out D [--seed S]

Exit codes: 0 converged, 2 not converged, 1 error.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from app.core.config import settings
from app.core.errors import OcnError
from app.core.logging import configure_logging, get_logger
from app.services.report_service import build_topology_report, write_artifacts
from app.services.scenario_service import ScenarioService, with_seed

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ocn-rgp", description=settings.PROJECT_NAME)
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    parser.add_argument("--log-level", default=None, help=f"Logging level (default {settings.LOG_LEVEL})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("report-topology", help="Print the topological and spectral constants of a scenario")
    p.add_argument("--scenario", required=True, help="Scenario JSON file")
    p.add_argument("--json", action="store_true", help="Print JSON instead of the aligned table")

    p = sub.add_parser("run", help="Run a scenario and write trace.csv, report.json, scenario.resolved.json")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--seed", type=int, default=None, help="Override the random initial-state seed")
    p.add_argument("--mode", choices=["centralized", "distributed", "compare"], default=None)

    p = sub.add_parser("compare", help="Run both engines and report their deviation")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    return parser


def _load(args: argparse.Namespace) -> ScenarioService:
    service = ScenarioService.from_file(args.scenario)
    seed = getattr(args, "seed", None)
    if seed is not None:
        service = ScenarioService(with_seed(service.scenario, seed), base_dir=service.base_dir)
    return service


def cmd_report_topology(args: argparse.Namespace) -> int:
    report = build_topology_report(_load(args).resolve())
    print(report.model_dump_json(indent=2) if args.json else report.to_text())
    return EXIT_OK


def cmd_run(args: argparse.Namespace, mode: str | None = None) -> int:
    service = _load(args)
    mode = mode or args.mode
    outcome = service.run(mode)
    write_artifacts(outcome, service.scenario, args.out)

    trace = outcome.traces[outcome.primary]
    if trace.converged:
        logger.info("Status: converged at k=%d", trace.k_bar)
    else:
        logger.info("Status: not converged within k_max=%d", trace.k_max)
    return outcome.exit_code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        match args.command:
            case "report-topology":
                return cmd_report_topology(args)
            case "run":
                return cmd_run(args)
            case "compare":
                return cmd_run(args, mode="compare")
    except OcnError as e:
        logger.error("%s", e)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
