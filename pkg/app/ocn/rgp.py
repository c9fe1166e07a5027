"""
Centralized adaptive reference generation.

The protocol mixes every channel's reference with its neighbours'::

    x(k+1) = Q_η(k) x(k),      Q_η = η·I + (1 − η)·P

which is a steepest-descent step of size ``1 − η`` on
``J(x) = ½·xᵀ(I − P)x``.  ``Q_η`` is doubly stochastic, so the mean of
``x`` never moves and ``‖x‖_∞`` never grows.

The adaptive rule picks the smallest admissible ``η`` that keeps every
per-step change inside the tightest rate limit of the network::

    η(k) = max(η_L, 1 − c(k) / (ω·‖x(k)‖_∞))      (η_L when x = 0)

Key design choices
------------------

1. **Global minimum limit**: ``c(k)`` is the minimum over all channels and
   both directions, which is conservative but needs only one scalar.
2. **Non-convergence is a result**: a run that reaches ``k_max`` returns a
   trace flagged ``converged = False`` instead of raising.
3. **Exact oracle**: this runner is the reference the distributed
   simulator is checked against; it uses the same ``W`` and ``η``
   expressions.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, Field

from app.constraints.field import ConstraintField
from app.core.config import settings
from app.core.errors import ProtocolError
from app.core.logging import get_logger
from app.ocn.analysis import delta_x_star, disagreement_W
from app.ocn.weights import linear_consensus_step, omega_bound, spectral_summary
from app.schemas.rgp import DetrendResult, RgpState
from app.schemas.trace import RunTrace
from app.schemas.weights import ConsensusWeights

logger = get_logger(__name__)

# ======================================================================
# Configuration
# ======================================================================


class RgpConfig(BaseModel):
    """Termination and fallback parameters of a run."""

    gamma: float = Field(default_factory=lambda: settings.DEFAULT_GAMMA, gt=0.0,
                         description="Agreement threshold on W")
    k_max: int = Field(default_factory=lambda: settings.DEFAULT_K_MAX, ge=0)
    zeta: float = Field(default_factory=lambda: settings.DEFAULT_ZETA, gt=0.0, lt=1.0,
                        description="Fallback lower mixing bound")


DEFAULT_CONFIG = RgpConfig()

# ======================================================================
# Mixing parameter
# ======================================================================


def eta_adaptive(x_inf: float, c_k: float, omega: float, eta_L: float) -> float:
    """Mixing value for the current step.

    Args:
        x_inf: ``‖x(k)‖_∞``.
        c_k: Network-wide rate limit ``c(k) > 0``.
        omega: ``ω ∈ [1, 2)``.
        eta_L: Lower bound in ``(0, 1)``.

    Returns:
        ``max(η_L, 1 − c_k / (ω·x_inf))``, or ``η_L`` when ``x_inf = 0``.
    """
    if x_inf > 0.0:
        return max(eta_L, 1.0 - c_k / (omega * x_inf))
    return eta_L


def eta_H_bound(x0_inf: float, min_c: float, omega: float, eta_L: float) -> float:
    """Upper bound on every ``η(k)`` of a nominal run started at ``‖x(0)‖_∞``."""
    return eta_adaptive(x0_inf, min_c, omega, eta_L)


# ======================================================================
# Objective and single steps
# ======================================================================


def objective_J(x: np.ndarray, w: ConsensusWeights) -> float:
    """``½·Σ_{i<j, j∈N_i} p_ij (x_i − x_j)²``, one term per neighbouring pair.

    Equals ``½·xᵀ(I − P)x`` so that its gradient is ``(I − P)x``; two
    channels at ``±1`` give 1, and the lower bound is ``ξ_lower·W²/(2φ)``.
    """
    x = np.asarray(x, dtype=float)
    P = w.dense()
    rows, cols = np.nonzero(np.triu(w.topology.adjacency, k=1))
    return 0.5 * float(np.sum(P[rows, cols] * (x[rows] - x[cols]) ** 2))


def objective_J_quadratic(x: np.ndarray, w: ConsensusWeights) -> float:
    """``½·xᵀ(I − P)x``."""
    x = np.asarray(x, dtype=float)
    return 0.5 * float(x @ objective_gradient(x, w))


def objective_gradient(x: np.ndarray, w: ConsensusWeights) -> np.ndarray:
    """``∇J(x) = (I − P)x``."""
    x = np.asarray(x, dtype=float)
    return x - w.apply(x)


def _check_eta(eta: float) -> None:
    if not 0.0 < eta < 1.0:
        raise ProtocolError(f"eta must lie in (0, 1), got {eta!r}")


def mix(x: np.ndarray, w: ConsensusWeights, eta: float) -> np.ndarray:
    """``η·x + (1 − η)·P x``."""
    _check_eta(eta)
    x = np.asarray(x, dtype=float)
    return eta * x + (1.0 - eta) * w.apply(x)


def steepest_descent_step(x: np.ndarray, w: ConsensusWeights, eta: float) -> np.ndarray:
    """``x − (1 − η)·∇J(x)``, algebraically identical to :func:`mix`."""
    _check_eta(eta)
    return np.asarray(x, dtype=float) - (1.0 - eta) * objective_gradient(x, w)


def rgp_step(s: RgpState, w: ConsensusWeights, eta: float) -> RgpState:
    """Advance the state by one protocol step with mixing value *eta*."""
    return s.model_copy(update={"x": mix(s.x, w, eta), "k": s.k + 1, "eta_history": (*s.eta_history, eta)})


# ======================================================================
# Detrending
# ======================================================================


def detrend(x0_raw: np.ndarray) -> DetrendResult:
    """Subtract the mean so the consensus target is zero."""
    x = np.asarray(x0_raw, dtype=float)
    alpha = float(np.mean(x))
    return DetrendResult(x0=x - alpha, alpha=alpha, mode="exact")


def consensus_detrend(x0_raw: np.ndarray, w: ConsensusWeights, tol: float | None = None,
                      max_steps: int | None = None) -> DetrendResult:
    """Detrend with per-channel mean estimates from plain average consensus.

    Every channel runs ``y ← P y`` from its own value until the estimates
    agree within *tol* (``settings.DETREND_CONSENSUS_TOL``) or *max_steps*
    is reached, then subtracts its own estimate.  The mean of the result is
    zero up to rounding because ``P`` is doubly stochastic.
    """
    tol = settings.DETREND_CONSENSUS_TOL if tol is None else tol
    max_steps = settings.DETREND_CONSENSUS_MAX_STEPS if max_steps is None else max_steps

    x = np.asarray(x0_raw, dtype=float)
    y = x.copy()
    steps = 0
    while disagreement_W(y) > tol and steps < max_steps:
        y = linear_consensus_step(w, y)
        steps += 1

    residual = disagreement_W(y)
    if residual > tol:
        logger.warning("Consensus detrend stopped after %d steps with residual %.3e > %.1e", steps, residual, tol)
    else:
        logger.debug("Consensus detrend converged in %d steps (residual %.3e)", steps, residual)
    return DetrendResult(x0=x - y, alpha=float(np.mean(y)), mode="consensus", steps=steps, residual=residual)


# ======================================================================
# Runner
# ======================================================================


class TraceBuilder:
    """Accumulates rows for a :class:`RunTrace`."""

    def __init__(self):
        self.x: list[np.ndarray] = []
        self.eta: list[float] = []
        self.c_D: list[np.ndarray] = []
        self.c_U: list[np.ndarray] = []
        self.messages: list[int] = []
        self.agent_eta: list[np.ndarray] = []

    def add_row(self, x: np.ndarray, c_D: np.ndarray, c_U: np.ndarray, messages: int = 0) -> None:
        self.x.append(np.array(x, dtype=float))
        self.c_D.append(c_D)
        self.c_U.append(c_U)
        self.messages.append(messages)

    def build(self, engine: str, config: RgpConfig, converged: bool, k_bar: int | None,
              with_agent_eta: bool = False) -> RunTrace:
        x = np.vstack(self.x)
        n = x.shape[1]
        return RunTrace(
            engine=engine,
            x=x,
            eta=np.asarray(self.eta, dtype=float),
            c_D=np.vstack(self.c_D),
            c_U=np.vstack(self.c_U),
            W=np.array([disagreement_W(r) for r in x]),
            x_inf=np.max(np.abs(x), axis=1),
            delta_x_star=np.array([delta_x_star(r) for r in x]),
            mcp_messages=np.asarray(self.messages, dtype=np.int64),
            agent_eta=(np.vstack(self.agent_eta) if self.agent_eta else np.empty((0, n)))
            if with_agent_eta else None,
            gamma=config.gamma,
            k_max=config.k_max,
            converged=converged,
            k_bar=k_bar,
        )


def rgp_run(x0: np.ndarray, w: ConsensusWeights, field: ConstraintField, config: RgpConfig = DEFAULT_CONFIG,
            eta_L: float | None = None, omega: float | None = None) -> RunTrace:
    """Run the protocol from *x0* until agreement or ``k_max``.

    Args:
        x0: Detrended initial references, length ``n``.
        w: MH weights of the channel graph.
        field: Download/upload limits.
        config: ``gamma``, ``k_max`` and ``zeta``.
        eta_L: Lower mixing bound; resolved from the spectrum of ``P`` when
            omitted.
        omega: Bound on ``‖I − P‖_∞``; computed from the topology when
            omitted.

    Returns:
        :class:`RunTrace` with ``k_bar`` set to the first step whose
        disagreement is ``≤ gamma``, or ``converged = False``.
    """
    x = np.asarray(x0, dtype=float)
    if x.shape != (w.n,):
        raise ProtocolError(f"Initial state has shape {x.shape}, expected ({w.n},)")
    if eta_L is None:
        eta_L = spectral_summary(w, config.zeta).eta_L
    if omega is None:
        omega = omega_bound(w.topology)

    builder = TraceBuilder()
    converged = False
    k_bar: int | None = None

    for k in range(config.k_max + 1):
        c_D, c_U = field.values(k)
        builder.add_row(x, c_D, c_U)
        if disagreement_W(x) <= config.gamma:
            converged, k_bar = True, k
            break
        if k == config.k_max:
            break
        c_k = float(min(c_D.min(), c_U.min()))
        eta = eta_adaptive(float(np.max(np.abs(x))), c_k, omega, eta_L)
        builder.eta.append(eta)
        x = mix(x, w, eta)

    if converged:
        logger.info("Centralized run converged at k=%d", k_bar)
    else:
        logger.info("Centralized run did not converge within k_max=%d (W=%.4g)", config.k_max, disagreement_W(x))
    return builder.build("centralized", config, converged, k_bar)
