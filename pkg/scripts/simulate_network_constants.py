"""Topological constants of the complete 22-junction network and the sparse 22/25 network.

Prints the full report for both shipped networks, then the formula-level
row for a sparse network known only through (d_m, d_M, rho, phi).
"""

from pathlib import Path

from app.core.config import settings
from app.ocn.analysis import R_index
from app.ocn.rgp import eta_H_bound
from app.services.report_service import build_topology_report
from app.services.scenario_service import ScenarioService

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

# ─── Sparse network published only through its degree/distance constants ─
SPARSE_D_MIN = 2
SPARSE_D_MAX = 5
SPARSE_RHO = 5
SPARSE_PHI = 7


def formula_row(d_m: int, d_M: int, rho: int, phi: int, eta_L: float) -> dict[str, float]:
    omega = 2.0 * d_M / (1.0 + d_M)
    return {
        "omega": omega,
        "xi_lower": 1.0 / (1.0 + d_M),
        "xi_upper": 1.0 - d_m / (1.0 + d_M),
        "R": R_index(d_m, d_M, rho, phi),
        "eta_H": eta_H_bound(settings.DEFAULT_TARGET_INF_NORM, settings.DEFAULT_UPLOAD_FLOOR, omega, eta_L),
    }


def main():
    for name in ("complete22.json", "synthetic_sparse.json"):
        service = ScenarioService.from_file(SCENARIOS / name)
        report = build_topology_report(service.resolve())
        print("=" * 60)
        print(service.scenario.name)
        print("=" * 60)
        print(report.to_text())
        print()

    print("=" * 60)
    print(f"Formula-level row (d_m={SPARSE_D_MIN}, d_M={SPARSE_D_MAX}, rho={SPARSE_RHO}, phi={SPARSE_PHI})")
    print("=" * 60)
    # eta_L only matters when the limit term is smaller than it
    row = formula_row(SPARSE_D_MIN, SPARSE_D_MAX, SPARSE_RHO, SPARSE_PHI, eta_L=settings.DEFAULT_ZETA)
    for key, value in row.items():
        print(f"{key:<10} {value:.6g}")


if __name__ == "__main__":
    main()
