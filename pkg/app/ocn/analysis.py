"""
Convergence analysis of reference-generation runs.

Disagreement is measured with the max-min function ``W(x) = max x − min x``.
Over any window of ``ρ`` steps (the radius of the channel graph) the product
of the mixing matrices has a column whose entries are all at least ``ε^ρ``,
where ``ε`` is the smallest positive mixing coefficient ever used.  Hence::

    W(x(k+ρ)) ≤ r·W(x(k)),      r = 1 − ε^ρ

with ``ε`` bracketed by ``ε̲ = (1−η_H)·ξ̲`` and ``ε̄ = ξ̄ + (1−ξ̄)·η_H``, which
give the bounds ``r̄ = 1 − ε̲^ρ`` and ``r̲ = 1 − ε̄^ρ``.  Two purely
topological indices complement them: ``r̂ = 1 − (2 + d_M − d_m)^{−ρ}`` and
``R = φ·(1 + (d_M − d_m)/2)^ρ``, the latter charging the ``φ`` rounds of
max-consensus every step costs.

The module only reads traces; nothing here changes a run.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from app.core.config import settings
from app.schemas.geometry import ChannelGeometry
from app.schemas.report import ContractionCheck, ConvergenceReport
from app.schemas.rgp import EtaBounds
from app.schemas.topology import ChannelTopology
from app.schemas.trace import RunTrace
from app.schemas.weights import ConsensusWeights

# ======================================================================
# State functions
# ======================================================================


def disagreement_W(x: np.ndarray) -> float:
    """``max_i x_i − min_i x_i``."""
    x = np.asarray(x, dtype=float)
    return float(np.max(x) - np.min(x))


def delta_x_star(x: np.ndarray) -> float:
    """Signed sup-norm: the entry of largest magnitude, lowest index on ties."""
    x = np.asarray(x, dtype=float)
    return float(x[int(np.argmax(np.abs(x)))])


def objective_bounds(x: np.ndarray, xi_lower: float, n: int, phi: int) -> tuple[float, float]:
    """Bounds on ``J(x) = ½·xᵀ(I − P)x`` in terms of ``W(x)``.

    The lower bound follows a shortest path (at most ``φ`` hops, every
    weight at least ``ξ̲``) between the extreme entries; the upper bound
    uses ``W`` on every pair.
    """
    W2 = disagreement_W(x) ** 2
    return xi_lower * W2 / (2.0 * phi), 0.5 * n * W2


# ======================================================================
# Theoretical bounds
# ======================================================================


def eps_bounds(eta_H: float, xi_lower: float, xi_upper: float) -> tuple[float, float]:
    """``(ε̲, ε̄) = ((1−η_H)·ξ̲, ξ̄ + (1−ξ̄)·η_H)``."""
    return (1.0 - eta_H) * xi_lower, xi_upper + (1.0 - xi_upper) * eta_H


def rate_bounds(eta_H: float, xi_lower: float, xi_upper: float, rho: int) -> tuple[float, float]:
    """``(r̲, r̄)`` for contraction over ``ρ`` steps."""
    eps_lower, eps_upper = eps_bounds(eta_H, xi_lower, xi_upper)
    return 1.0 - eps_upper ** rho, 1.0 - eps_lower ** rho


def r_hat(d_m: int, d_M: int, rho: int) -> float:
    """Topological estimate of the contraction factor, in ``[0.5, 1)``."""
    return 1.0 - (2.0 + d_M - d_m) ** (-rho)


def R_hat_index(d_m: int, d_M: int, rho: int) -> float:
    return (1.0 + (d_M - d_m) / 2.0) ** rho


def R_index(d_m: int, d_M: int, rho: int, phi: int) -> float:
    """Convergence-rate index including the max-consensus cost; ``1`` only for ``K₂``."""
    return phi * R_hat_index(d_m, d_M, rho)


# ======================================================================
# Mixing matrices
# ======================================================================


def mixing_matrix(w: ConsensusWeights, eta: float) -> np.ndarray:
    """Dense ``Q_η = η·I + (1 − η)·P``."""
    return eta * np.eye(w.n) + (1.0 - eta) * w.dense()


def mixing_product(w: ConsensusWeights, etas: Sequence[float]) -> np.ndarray:
    """``Q_η(K−1) ⋯ Q_η(0)`` for the given sequence (identity when empty)."""
    F = np.eye(w.n)
    P = w.dense()
    for eta in etas:
        F = eta * F + (1.0 - eta) * (P @ F)
    return F


def realized_epsilon(w: ConsensusWeights, etas: Sequence[float]) -> float | None:
    """Smallest positive coefficient ``q_ij(k)`` over a run (``None`` if no step was taken)."""
    if len(etas) == 0:
        return None
    P = w.dense()
    diag = np.diag(P)
    off = P[np.asarray(w.topology.adjacency, dtype=bool)]
    eta = np.asarray(etas, dtype=float)
    q_self = eta + (1.0 - eta) * diag.min()
    q_nbr = (1.0 - eta) * off.min()
    return float(min(q_self.min(), q_nbr.min()))


def product_column_check(w: ConsensusWeights, etas: Sequence[float], rho: int, eps_lower: float,
                         tol: float = 1e-15) -> tuple[bool, float]:
    """Every ``ρ``-window product has a column with all entries ``≥ ε̲^ρ``.

    Returns:
        ``(ok, worst)`` where *worst* is the smallest, over windows, of the
        best column minimum.  Intended for small ``n``.
    """
    worst = float("inf")
    for k in range(len(etas) - rho + 1):
        B = mixing_product(w, etas[k:k + rho])
        worst = min(worst, float(B.min(axis=0).max()))
    if worst == float("inf"):
        return True, worst
    return worst >= eps_lower ** rho - tol, worst


# ======================================================================
# Trace checks
# ======================================================================


def contraction_verify(W_series: Sequence[float], rho: int, r_upper: float, tol: float | None = None,
                       w_zero: float | None = None) -> ContractionCheck:
    """Check ``W(k+ρ) ≤ r̄·W(k)`` along a trace.

    Steps whose ``W(k)`` is below *w_zero* are skipped.  Violations are
    reported, never raised.
    """
    tol = settings.CONTRACTION_TOL if tol is None else tol
    w_zero = settings.W_ZERO_TOL if w_zero is None else w_zero

    W = np.asarray(W_series, dtype=float)
    ratios: list[float] = []
    violations: list[int] = []
    for k in range(len(W) - rho):
        if W[k] <= w_zero:
            continue
        ratio = float(W[k + rho] / W[k])
        ratios.append(ratio)
        if ratio > r_upper + tol:
            violations.append(k)

    return ContractionCheck(ratios=ratios, violations=violations, max_ratio=max(ratios) if ratios else None,
                            r_upper=r_upper, satisfied=not violations)


def constraint_excess(x: np.ndarray, c_D: np.ndarray, c_U: np.ndarray) -> np.ndarray:
    """Per-step, per-channel excess of ``δx`` over its band ``[−c_D, c_U]`` (``≤ 0`` when satisfied).

    Args:
        x: States, shape ``(K+1, n)``.
        c_D, c_U: Limits active at each row, shape ``(K+1, n)``.

    Returns:
        Array of shape ``(K, n)``.
    """
    dx = np.diff(x, axis=0)
    return np.maximum(dx - c_U[:-1], -c_D[:-1] - dx)


def mean_drift(x: np.ndarray) -> float:
    """``max_k |mean(x(k)) − mean(x(0))|``."""
    means = np.mean(x, axis=1)
    return float(np.max(np.abs(means - means[0])))


def norm_monotone(x: np.ndarray, tol: float = 1e-14) -> bool:
    """``‖x(k+1)‖_∞ ≤ ‖x(k)‖_∞ + tol`` at every step."""
    norms = np.max(np.abs(x), axis=1)
    return bool(np.all(np.diff(norms) <= tol))


def topology_constants(ct: ChannelTopology) -> dict[str, float]:
    """``r̂``, ``R̂`` and ``R`` of a channel graph."""
    return {
        "r_hat": r_hat(ct.d_m, ct.d_M, ct.rho),
        "R_hat": R_hat_index(ct.d_m, ct.d_M, ct.rho),
        "R": R_index(ct.d_m, ct.d_M, ct.rho, ct.phi),
    }


# ======================================================================
# Run report
# ======================================================================


def build_convergence_report(trace: RunTrace, w: ConsensusWeights, eta_L: float, eta_H: float, scenario: str,
                             seed: int | None = None, alpha: float = 0.0,
                             geometries: Sequence[ChannelGeometry | None] | None = None) -> ConvergenceReport:
    """Measure a run against the theoretical bounds.

    Args:
        trace: Output of either engine.
        w: Weights the run used.
        eta_L: Lower mixing bound.
        eta_H: Upper mixing bound of the *nominal* constraints.  When a run
            exceeds it (fault overlays), the contraction and ``ε`` checks
            use the largest observed ``η`` instead and the report flags it.
        scenario: Scenario name for the report.
        seed: Seed of a random initial state, if any.
        alpha: Mean removed by detrending.
        geometries: Per-channel geometry, for the height-range check and
            the rebased zero references.
    """
    eta_H = EtaBounds(eta_L=eta_L, eta_H=eta_H).eta_H
    ct = w.topology
    xi_lower = 1.0 / (1.0 + ct.d_M)
    xi_upper = 1.0 - ct.d_m / (1.0 + ct.d_M)
    r_lower, r_upper = rate_bounds(eta_H, xi_lower, xi_upper, ct.rho)
    eps_lower, eps_upper = eps_bounds(eta_H, xi_lower, xi_upper)

    etas = trace.eta
    eta_max = float(etas.max()) if etas.size else None
    exceed = [int(k) for k in np.flatnonzero(etas > eta_H + settings.CONTRACTION_TOL)]
    eta_eff = max(eta_H, eta_max) if exceed else eta_H
    _, r_eff = rate_bounds(eta_eff, xi_lower, xi_upper, ct.rho)
    eps_eff_lower, eps_eff_upper = eps_bounds(eta_eff, xi_lower, xi_upper)

    contraction = contraction_verify(trace.W, ct.rho, r_eff)
    eps_real = realized_epsilon(w, etas)
    eps_ok = None if eps_real is None else bool(eps_eff_lower - 1e-15 <= eps_real <= eps_eff_upper + 1e-15)

    excess = constraint_excess(trace.x, trace.c_D, trace.c_U)
    tol = settings.STOCHASTIC_TOL
    n_viol = int(np.count_nonzero(excess > tol))
    max_excess = float(excess.max()) if excess.size else 0.0

    column_ok = column_min = None
    if ct.n <= settings.DENSE_WEIGHTS_MAX_N:
        column_ok, column_min = product_column_check(w, etas, ct.rho, eps_eff_lower)
        if column_min == float("inf"):
            column_min = None

    x_final = trace.x[-1]
    consensus_error = float(np.max(np.abs(x_final - np.mean(trace.x[0]))))
    P = w.dense()
    J = 0.5 * np.einsum("ki,ki->k", trace.x, trace.x - trace.x @ P.T)
    final_J = float(J[-1])
    J_ok = all(lo - tol <= j <= hi + tol
               for j, (lo, hi) in zip(J, (objective_bounds(x, xi_lower, ct.n, ct.phi) for x in trace.x)))

    rebased = within = None
    if geometries is not None and all(g is not None for g in geometries):
        # detrended state lives around the rebased reference h_Z + alpha
        lower = np.array([g.x_lower for g in geometries]) - alpha
        upper = np.array([g.x_upper for g in geometries]) - alpha
        rebased = [g.h_Z + alpha for g in geometries]
        within = bool(np.all(trace.x >= lower - tol) and np.all(trace.x <= upper + tol))

    consts = topology_constants(ct)
    return ConvergenceReport(
        scenario=scenario,
        seed=seed,
        engine=trace.engine,
        status=trace.status,
        k_bar=trace.k_bar,
        steps=trace.last_k,
        gamma=trace.gamma,
        W_series=trace.W.tolist(),
        delta_x_star_series=trace.delta_x_star.tolist(),
        eta_series=etas.tolist(),
        eta_L=eta_L,
        eta_H=eta_H,
        eta_max_observed=eta_max,
        eta_bound_exceeded=bool(exceed),
        eta_exceedance_steps=exceed,
        rho=ct.rho,
        r_upper=r_upper,
        r_lower=r_lower,
        r_hat=consts["r_hat"],
        R_index=consts["R"],
        R_hat=consts["R_hat"],
        eps_lower=eps_lower,
        eps_upper=eps_upper,
        eps_realized=eps_real,
        eps_in_bounds=eps_ok,
        empirical_rho_contractions=contraction.ratios,
        contraction=contraction,
        product_column_ok=column_ok,
        product_column_min=column_min,
        max_mean_drift=mean_drift(trace.x),
        norm_monotone=norm_monotone(trace.x),
        constraint_violations=n_viol,
        max_constraint_excess=max_excess,
        final_consensus_error=consensus_error,
        final_objective=final_J,
        objective_in_bounds=J_ok,
        alpha=alpha,
        rebased_references=rebased,
        within_height_bounds=within,
        mcp_messages_total=int(trace.mcp_messages.sum()),
    )
