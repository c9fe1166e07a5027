"""
Metropolis-Hastings consensus weights and the constants derived from them.

For neighbouring channels ``i`` and ``j``::

    p_ij = 1 / (1 + max(d_i, d_j))          p_ii = 1 − Σ_{j∈N_i} p_ij

which makes ``P`` symmetric and doubly stochastic with a strictly positive
diagonal.  From ``P`` we derive:

- the spectral pair ``λ₁`` (second largest) and ``λ_{n−1}`` (smallest),
  their mean ``ς_P``, the static optimum ``η* = ς_P / (ς_P − 1)`` and the
  lower mixing bound ``η_L`` (``η*`` if positive, else the fallback ``ζ``);
- the purely topological bounds ``ξ̲ = 1/(1+d_M)`` on the smallest positive
  entry, ``ξ̄ = 1 − d_m/(1+d_M)`` on the largest entry, and
  ``ω = 2 d_M / (1+d_M) ≥ ‖I − P‖_∞``.

Small networks use a dense matrix, large ones a CSR array; both paths build
the same numbers.  The eigensolver is ``scipy.linalg.eigh`` with the
tridiagonal-reduction + implicit-QR driver.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from app.core.config import settings
from app.core.errors import SpectralError, WeightsError
from app.core.logging import get_logger
from app.schemas.topology import ChannelTopology
from app.schemas.weights import ConsensusWeights, SpectralSummary

logger = get_logger(__name__)

# ======================================================================
# Construction
# ======================================================================


def _neighbor_weight_entries(ct: ChannelTopology) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rows, columns and values of the off-diagonal MH weights."""
    rows, cols = np.nonzero(ct.adjacency)
    deg = np.asarray(ct.degrees, dtype=float)
    vals = 1.0 / (1.0 + np.maximum(deg[rows], deg[cols]))
    return rows, cols, vals


def build_mh_weights(ct: ChannelTopology, dense_max_n: int | None = None) -> ConsensusWeights:
    """Build the Metropolis-Hastings matrix of *ct*.

    Args:
        ct: Connected channel topology.
        dense_max_n: Largest ``n`` stored densely.  Defaults to
            ``settings.DENSE_WEIGHTS_MAX_N``.

    Returns:
        :class:`ConsensusWeights` that passed :func:`check_doubly_stochastic`.
    """
    limit = settings.DENSE_WEIGHTS_MAX_N if dense_max_n is None else dense_max_n
    rows, cols, vals = _neighbor_weight_entries(ct)

    # rows come out of np.nonzero sorted, so each row is one contiguous block
    blocks = np.split(vals, np.cumsum(ct.degrees)[:-1])
    diag = np.array([1.0 - math.fsum(b) for b in blocks])

    if ct.n <= limit:
        P = np.zeros((ct.n, ct.n))
        P[rows, cols] = vals
        P[np.arange(ct.n), np.arange(ct.n)] = diag
    else:
        all_rows = np.concatenate([rows, np.arange(ct.n)])
        all_cols = np.concatenate([cols, np.arange(ct.n)])
        P = sp.csr_array((np.concatenate([vals, diag]), (all_rows, all_cols)), shape=(ct.n, ct.n))
        P.sort_indices()

    w = ConsensusWeights(P=P, topology=ct)
    check_doubly_stochastic(w)
    logger.debug("MH weights built: n=%d storage=%s", ct.n, "csr" if w.is_sparse else "dense")
    return w


def check_doubly_stochastic(w: ConsensusWeights, tol: float | None = None) -> None:
    """Raise :class:`WeightsError` unless ``P`` is a valid MH consensus matrix.

    Checks row and column sums, symmetry, the support pattern
    (``p_ij > 0`` iff ``j`` is in the closed neighbourhood) and the range
    ``[0, 1)`` of every entry.
    """
    tol = settings.STOCHASTIC_TOL if tol is None else tol
    P = w.dense()
    ct = w.topology

    row_err = np.max(np.abs(P.sum(axis=1) - 1.0))
    col_err = np.max(np.abs(P.sum(axis=0) - 1.0))
    if row_err > tol or col_err > tol:
        raise WeightsError(f"P is not doubly stochastic: row error {row_err:.3e}, column error {col_err:.3e}")
    if not np.array_equal(P, P.T):
        raise WeightsError("P is not symmetric")

    support = np.asarray(ct.adjacency, dtype=bool) | np.eye(ct.n, dtype=bool)
    if not np.array_equal(P > 0.0, support):
        raise WeightsError("Support of P differs from the closed neighbourhoods of the channel graph")
    if P.min() < 0.0 or P.max() >= 1.0:
        raise WeightsError(f"P entries must lie in [0, 1), got [{P.min():.6g}, {P.max():.6g}]")


def linear_consensus_step(w: ConsensusWeights, x: np.ndarray) -> np.ndarray:
    """Plain average-consensus update ``x ← P x``."""
    return w.apply(x)


# ======================================================================
# Spectrum
# ======================================================================


def _eigenvalues(P: np.ndarray) -> np.ndarray:
    try:
        ev = scipy.linalg.eigh(P, eigvals_only=True, driver="ev", check_finite=True)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        residual = float(np.max(np.abs(P @ np.ones(P.shape[0]) - 1.0)))
        raise SpectralError(f"Eigensolver failed ({e}); stochasticity residual {residual:.3e}") from e
    return np.sort(ev)


def static_spectral_radius(lambda_1: float, lambda_n_minus_1: float, eta: float) -> float:
    """Convergence factor of the static ``η·I + (1−η)·P`` off the agreement line."""
    return max(abs(eta + (1.0 - eta) * lambda_1), abs(eta + (1.0 - eta) * lambda_n_minus_1))


def optimal_static_eta(varsigma_P: float) -> float:
    """``η* = ς_P / (ς_P − 1)``."""
    return varsigma_P / (varsigma_P - 1.0)


def spectral_summary(w: ConsensusWeights, zeta: float | None = None) -> SpectralSummary:
    """Eigen-decompose ``P`` and resolve the lower mixing bound ``η_L``.

    Args:
        w: Validated MH weights.
        zeta: Fallback lower bound in ``(0, 1)``; defaults to
            ``settings.DEFAULT_ZETA``.

    Raises:
        SpectralError: Eigensolver failure or a spectrum inconsistent with
            a connected, aperiodic doubly-stochastic ``P``.
    """
    zeta = settings.DEFAULT_ZETA if zeta is None else zeta
    if not 0.0 < zeta < 1.0:
        raise WeightsError(f"zeta must lie in (0, 1), got {zeta}")

    tol = settings.EIGEN_TOL
    ev = _eigenvalues(w.dense())
    lam0, lam1, lam_min = float(ev[-1]), float(ev[-2]), float(ev[0])

    if abs(lam0 - 1.0) > tol:
        raise SpectralError(f"Largest eigenvalue of P is {lam0!r}, expected 1")
    if not (-1.0 + tol < lam_min <= lam1 < 1.0 - tol):
        raise SpectralError(
            f"Spectrum outside (-1, 1) off the agreement line: lambda_1={lam1!r}, lambda_n-1={lam_min!r}"
        )

    varsigma = 0.5 * (lam1 + lam_min)
    eta_star = optimal_static_eta(varsigma)
    eta_L = eta_star if eta_star > 0.0 else zeta

    return SpectralSummary(lambda_1=lam1, lambda_n_minus_1=lam_min, varsigma_P=varsigma, eta_star=eta_star,
                           eta_L=eta_L, zeta=zeta,
                           static_rate_at_eta_L=static_spectral_radius(lam1, lam_min, eta_L))


# ======================================================================
# Topological bounds
# ======================================================================


def xi_bounds(ct: ChannelTopology, w: ConsensusWeights | None = None) -> tuple[float, float]:
    """``(ξ̲, ξ̄) = (1/(1+d_M), 1 − d_m/(1+d_M))``.

    When *w* is given, also checks that its smallest positive entry equals
    ``ξ̲`` and its largest entry does not exceed ``ξ̄``.
    """
    xi_lower = 1.0 / (1.0 + ct.d_M)
    xi_upper = 1.0 - ct.d_m / (1.0 + ct.d_M)

    if w is not None:
        P = w.dense()
        min_pos = float(P[P > 0.0].min())
        if abs(min_pos - xi_lower) > 1e-15:
            raise WeightsError(f"Smallest positive weight {min_pos!r} differs from 1/(1+d_M)={xi_lower!r}")
        if float(P.max()) > xi_upper + settings.STOCHASTIC_TOL:
            raise WeightsError(f"Largest weight {float(P.max())!r} exceeds 1 - d_m/(1+d_M)={xi_upper!r}")
    return xi_lower, xi_upper


def omega_bound(ct: ChannelTopology, w: ConsensusWeights | None = None) -> float:
    """``ω = 2 d_M / (1 + d_M)``, an upper bound on ``‖I − P‖_∞``."""
    omega = 2.0 * ct.d_M / (1.0 + ct.d_M)
    if w is not None:
        norm = float(np.max(np.abs(np.eye(ct.n) - w.dense()).sum(axis=1)))
        if norm > omega + settings.STOCHASTIC_TOL:
            raise WeightsError(f"||I - P||_inf = {norm!r} exceeds omega = {omega!r}")
    return omega
