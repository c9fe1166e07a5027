"""Sparse vs complete network: convergence step over many seeds with paired initial states.

For every seed the sparse network starts from a random state and the
complete network over the same junctions starts from that state copied
onto the shared channels.
"""

import argparse
import statistics
from pathlib import Path

from app.core.logging import configure_logging
from app.services.scenario_service import ScenarioService, with_seed

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def k_bars(path: Path, seeds: range) -> list[int | None]:
    base = ScenarioService.from_file(path)
    out = []
    for seed in seeds:
        service = ScenarioService(with_seed(base.scenario, seed), base_dir=base.base_dir)
        trace = service.run("centralized").traces["centralized"]
        out.append(trace.k_bar)
    return out


def summarize(name: str, values: list[int | None]) -> float:
    done = [v for v in values if v is not None]
    median = statistics.median(done) if done else float("nan")
    print(f"{name:<20} converged {len(done):>3}/{len(values):<3}  median k_bar {median:>6}  "
          f"range [{min(done, default='--')}, {max(done, default='--')}]")
    return median


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=100)
    args = parser.parse_args()
    configure_logging("WARNING")

    seeds = range(args.seeds)
    sparse = k_bars(SCENARIOS / "synthetic_sparse.json", seeds)
    complete = k_bars(SCENARIOS / "complete22_paired.json", seeds)

    print("=" * 60)
    m_sparse = summarize("synthetic_sparse", sparse)
    m_complete = summarize("complete22_paired", complete)
    print("=" * 60)
    print("complete network faster" if m_complete < m_sparse else "complete network NOT faster")


if __name__ == "__main__":
    main()
