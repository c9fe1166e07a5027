"""
Agent-level simulation of the distributed reference generation protocol.

Each channel is an agent that only knows its neighbours, its row of ``P``
and pre-distributed copies of ``η_L``, ``ω``, ``φ`` and ``γ``.  One protocol
step is:

1. four max-consensus sessions run side by side for ``φ`` rounds, on
   ``x_i``, ``−x_i``, ``−c_i^D(k)`` and ``−c_i^U(k)``, so every agent learns
   ``max x``, ``min x`` and the network-wide limits;
2. every agent tests ``x_M − x_m ≤ γ`` and stops if it holds;
3. otherwise every agent computes its own ``η^i(k)`` and mixes its state
   with its neighbours'.

Since max-consensus is exact after ``φ`` rounds, every agent computes the
same ``η`` as the centralized runner and the two traces coincide.

Key design choices
------------------

1. **Synchronous rounds**: a barrier separates rounds and steps; every
   read in a round sees the snapshot published at its start.
2. **Neighbour-only reads**: agents read through a :class:`NeighborBus`
   that rejects any index outside the closed neighbourhood and counts
   messages.
3. **Deterministic parallelism**: agents may be evaluated by a thread
   pool; each writes only its own slot, so the result does not depend on
   the number of workers.
4. **Zero-state branch**: an agent whose local ``‖x‖_∞`` estimate is 0 uses
   ``η_L``, as the centralized rule does.
"""

from __future__ import annotations

from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.constraints.field import ConstraintField
from app.core.config import settings
from app.core.errors import ProtocolError
from app.core.logging import get_logger
from app.ocn.rgp import DEFAULT_CONFIG, RgpConfig, TraceBuilder, eta_adaptive
from app.ocn.weights import omega_bound, spectral_summary
from app.schemas.topology import ChannelTopology
from app.schemas.trace import RunTrace
from app.schemas.weights import ConsensusWeights

logger = get_logger(__name__)

# Session rows inside the stacked max-consensus buffer
_X_MAX, _X_NEG_MIN, _C_D, _C_U = 0, 1, 2, 3

# ======================================================================
# Configuration
# ======================================================================


class SimulatorConfig(BaseModel):
    """Execution knobs that must not change the result."""

    workers: int = Field(default_factory=lambda: settings.SIM_WORKERS, ge=1,
                         description="Threads evaluating agents within a round")
    precomputed_constraints: bool = Field(
        False, description="Hand agents c(k) beforehand instead of running the two limit sessions",
    )


DEFAULT_SIM_CONFIG = SimulatorConfig()

# ======================================================================
# Agents and communication
# ======================================================================


class Agent(BaseModel):
    """Local view of one channel."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    id: int
    neighbors: tuple[int, ...]
    closed: tuple[int, ...] = Field(..., description="Closed neighbourhood, sorted")
    weights: np.ndarray = Field(..., description="p_ij for j in `closed`")
    eta_L: float
    omega: float
    phi: int
    gamma: float
    x: float
    x_M: float = float("nan")
    x_m: float = float("nan")
    c_D: float = float("nan")
    c_U: float = float("nan")
    eta: float | None = None

    @property
    def local_inf_norm(self) -> float:
        return max(-self.x_m, self.x_M)

    def agrees(self) -> bool:
        return self.x_M - self.x_m <= self.gamma

    def next_eta(self) -> float:
        return eta_adaptive(self.local_inf_norm, min(self.c_D, self.c_U), self.omega, self.eta_L)


class NeighborBus:
    """Round snapshot that agents may only read within their closed neighbourhood."""

    def __init__(self, neighborhoods: tuple[tuple[int, ...], ...]):
        self._n = len(neighborhoods)
        self._allowed = []
        for i, nbrs in enumerate(neighborhoods):
            mask = np.zeros(self._n, dtype=bool)
            mask[list(nbrs)] = True
            mask[i] = True
            self._allowed.append(mask)
        self._snapshot: np.ndarray | None = None
        self.sent = np.zeros(self._n, dtype=np.int64)

    def publish(self, values: np.ndarray) -> None:
        """Freeze the values every agent exposes for this round (shape ``(sessions, n)``)."""
        self._snapshot = np.array(values, dtype=float, copy=True)

    def gather(self, i: int, idx: tuple[int, ...], count: bool = True) -> np.ndarray:
        """Values of agents *idx* as seen by agent *i*.

        Raises:
            ProtocolError: If *idx* leaves the closed neighbourhood of *i*.
        """
        if self._snapshot is None:
            raise ProtocolError("No snapshot published for this round")
        sel = np.asarray(idx, dtype=np.intp)
        if not self._allowed[i][sel].all():
            outside = [int(j) for j in sel if not self._allowed[i][j]]
            raise ProtocolError(f"Agent {i} tried to read non-neighbours {outside}")
        if count:
            self.sent[i] += int(np.count_nonzero(sel != i)) * self._snapshot.shape[0]
        return self._snapshot[:, sel]


class MaxConsensusSession:
    """Synchronous max-consensus over a set of neighbourhoods.

    Several sessions share one stacked buffer of shape ``(sessions, n)``;
    each round every agent replaces its estimates with the maximum over its
    closed neighbourhood.
    """

    def __init__(self, neighborhoods: tuple[tuple[int, ...], ...], values: np.ndarray,
                 bus: NeighborBus | None = None, runner: Callable | None = None):
        self.neighborhoods = neighborhoods
        self.estimates = np.atleast_2d(np.array(values, dtype=float))
        self.bus = bus if bus is not None else NeighborBus(neighborhoods)
        self.rounds = 0
        self._runner = runner if runner is not None else _run_sequential

    def step(self) -> np.ndarray:
        """One round; returns the new estimates."""
        self.bus.publish(self.estimates)
        new = self.estimates.copy()

        def update(i: int) -> None:
            nbrs = self.neighborhoods[i]
            if nbrs:
                new[:, i] = np.maximum(self.estimates[:, i], self.bus.gather(i, nbrs).max(axis=1))

        self._runner(update, len(self.neighborhoods))
        self.estimates = new
        self.rounds += 1
        return self.estimates

    def run(self, rounds: int) -> np.ndarray:
        for _ in range(rounds):
            self.step()
        return self.estimates

    @property
    def agreed(self) -> bool:
        """Every agent holds the same estimate in every session."""
        return bool(np.all(self.estimates == self.estimates[:, :1]))


def _run_sequential(fn: Callable[[int], None], n: int) -> None:
    for i in range(n):
        fn(i)


def mcp_run(values: np.ndarray, ct: ChannelTopology) -> np.ndarray:
    """Per-agent global maximum after exactly ``φ`` rounds."""
    session = MaxConsensusSession(ct.neighborhoods, values)
    return session.run(ct.phi)[0]


# ======================================================================
# Simulator
# ======================================================================


class DistributedSimulator:
    """Runs the per-agent protocol on a channel network.

    Args:
        w: MH weights; each agent receives only its own row.
        field: Constraint field; agent ``i`` reads only channel ``i``.
        config: ``gamma``, ``k_max`` and ``zeta``.
        sim: Worker count and constraint-session mode.
        eta_L, omega: Pre-distributed constants; resolved from ``w`` when
            omitted.
    """

    def __init__(self, w: ConsensusWeights, field: ConstraintField, config: RgpConfig = DEFAULT_CONFIG,
                 sim: SimulatorConfig = DEFAULT_SIM_CONFIG, eta_L: float | None = None, omega: float | None = None):
        self.w = w
        self.ct = w.topology
        self.field = field
        self.config = config
        self.sim = sim
        self.eta_L = spectral_summary(w, config.zeta).eta_L if eta_L is None else eta_L
        self.omega = omega_bound(self.ct) if omega is None else omega
        self.agents: list[Agent] = []
        self._pool: ThreadPoolExecutor | None = None
        self._last_messages = 0

    # ------------------------------------------------------------------
    # Setup
    # ------------------------------------------------------------------

    def _make_agents(self, x0: np.ndarray) -> list[Agent]:
        agents = []
        for i in range(self.ct.n):
            closed, weights = self.w.local_weights(i)
            agents.append(Agent(id=i, neighbors=self.ct.neighborhoods[i], closed=closed, weights=weights,
                                eta_L=self.eta_L, omega=self.omega, phi=self.ct.phi, gamma=self.config.gamma,
                                x=float(x0[i])))
        return agents

    def _for_each_agent(self, fn: Callable[[int], None], n: int) -> None:
        if self._pool is None:
            _run_sequential(fn, n)
            return
        chunks = np.array_split(np.arange(n), self.sim.workers)

        def work(chunk: np.ndarray) -> None:
            for i in chunk:
                fn(int(i))

        list(self._pool.map(work, chunks))

    # ------------------------------------------------------------------
    # One protocol step
    # ------------------------------------------------------------------

    def _gather_extremes(self, k: int, bus: NeighborBus) -> None:
        """Run the parallel max-consensus sessions and store the results on the agents."""
        x = np.array([a.x for a in self.agents])
        if self.sim.precomputed_constraints:
            stacked = np.vstack([x, -x])
        else:
            c_D, c_U = self.field.values(k)
            stacked = np.vstack([x, -x, -c_D, -c_U])

        session = MaxConsensusSession(self.ct.neighborhoods, stacked, bus=bus, runner=self._for_each_agent)
        out = session.run(self.ct.phi)
        if not session.agreed:
            raise ProtocolError(f"Max-consensus estimates still differ after phi={self.ct.phi} rounds at k={k}")

        c_net = self.field.network_min(k) if self.sim.precomputed_constraints else None
        for i, a in enumerate(self.agents):
            a.x_M = float(out[_X_MAX, i])
            a.x_m = float(-out[_X_NEG_MIN, i])
            if c_net is None:
                a.c_D = float(-out[_C_D, i])
                a.c_U = float(-out[_C_U, i])
            else:
                a.c_D = a.c_U = c_net

    def protocol_step(self, k: int) -> bool:
        """Run step *k* on every agent.

        Returns:
            ``True`` when the agents detected agreement (no update was made).
        """
        bus = NeighborBus(self.ct.neighborhoods)
        self._gather_extremes(k, bus)
        self._last_messages = int(bus.sent.sum())

        votes = {a.agrees() for a in self.agents}
        if len(votes) != 1:
            raise ProtocolError(f"Agents disagree on termination at k={k}")
        if votes.pop():
            return True

        for a in self.agents:
            a.eta = a.next_eta()

        x_bus = NeighborBus(self.ct.neighborhoods)
        x_bus.publish(np.array([[a.x for a in self.agents]]))
        new_x = np.empty(self.ct.n)

        def update(i: int) -> None:
            a = self.agents[i]
            local = x_bus.gather(i, a.closed, count=False)[0]
            new_x[i] = a.eta * a.x + (1.0 - a.eta) * float(np.dot(a.weights, local))

        self._for_each_agent(update, self.ct.n)
        for i, a in enumerate(self.agents):
            a.x = float(new_x[i])
        return False

    # ------------------------------------------------------------------
    # Run
    # ------------------------------------------------------------------

    def run(self, x0: np.ndarray) -> RunTrace:
        """Simulate from *x0* until the agents agree or ``k_max`` is reached."""
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (self.ct.n,):
            raise ProtocolError(f"Initial state has shape {x0.shape}, expected ({self.ct.n},)")
        self.agents = self._make_agents(x0)
        builder = TraceBuilder()
        converged = False
        k_bar: int | None = None

        self._pool = ThreadPoolExecutor(max_workers=self.sim.workers) if self.sim.workers > 1 else None
        try:
            for k in range(self.config.k_max + 1):
                x = np.array([a.x for a in self.agents])
                terminated = self.protocol_step(k) if k < self.config.k_max else None
                if terminated is None:
                    # last admissible step: only the agreement test runs
                    bus = NeighborBus(self.ct.neighborhoods)
                    self._gather_extremes(k, bus)
                    self._last_messages = int(bus.sent.sum())
                    terminated = self.agents[0].agrees()

                c_D, c_U = self.field.values(k)
                builder.add_row(x, c_D, c_U, messages=self._last_messages)
                if terminated:
                    converged, k_bar = True, k
                    break
                if k == self.config.k_max:
                    break
                etas = np.array([a.eta for a in self.agents])
                if np.any(etas != etas[0]):
                    raise ProtocolError(f"Agents computed different mixing values at k={k}")
                builder.eta.append(float(etas[0]))
                builder.agent_eta.append(etas)
        finally:
            if self._pool is not None:
                self._pool.shutdown()
                self._pool = None

        if converged:
            logger.info("Distributed run converged at k=%d (%d MCP messages)", k_bar, int(sum(builder.messages)))
        else:
            logger.info("Distributed run did not converge within k_max=%d", self.config.k_max)
        return builder.build("distributed", self.config, converged, k_bar, with_agent_eta=True)


def run_distributed(x0: np.ndarray, w: ConsensusWeights, field: ConstraintField, config: RgpConfig = DEFAULT_CONFIG,
                    sim: SimulatorConfig = DEFAULT_SIM_CONFIG, eta_L: float | None = None,
                    omega: float | None = None) -> RunTrace:
    """Convenience wrapper around :class:`DistributedSimulator`."""
    return DistributedSimulator(w, field, config, sim, eta_L, omega).run(x0)
