"""
Report schemas written to ``report.json`` and printed by ``report-topology``.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class ContractionCheck(BaseModel):
    """Per-radius contraction factors ``W(k+ρ)/W(k)`` of one trace."""

    ratios: list[float] = Field(default_factory=list)
    violations: list[int] = Field(default_factory=list, description="Steps k whose factor exceeds r_upper")
    max_ratio: float | None = None
    r_upper: float
    satisfied: bool = True


class TopologyReport(BaseModel):
    """Topological and spectral constants of a channel network."""

    m: int
    n: int
    adjoint_edges: int
    lambda_1: float
    lambda_n_minus_1: float
    varsigma_P: float
    eta_star: float
    eta_L: float
    eta_L_is_zeta: bool
    eta_H: float | None = Field(None, description="Needs initial state and constraints; None means n/a")
    d_m: int
    d_M: int
    omega: float
    xi_lower: float
    xi_upper: float
    rho: int
    phi: int
    R: float
    R_hat: float
    r_hat: float
    r_upper: float | None = None
    r_lower: float | None = None
    static_rate_at_eta_L: float

    def to_text(self) -> str:
        """Aligned ``name  value`` table."""

        def fmt(v) -> str:
            if v is None:
                return "n/a"
            if isinstance(v, bool):
                return "yes" if v else "no"
            if isinstance(v, int):
                return str(v)
            return f"{v:.6g}"

        rows = [
            ("junctions m", self.m), ("channels n", self.n), ("adjoint edges", self.adjoint_edges),
            ("varsigma_P", self.varsigma_P), ("lambda_1", self.lambda_1), ("lambda_n-1", self.lambda_n_minus_1),
            ("d_m", self.d_m), ("d_M", self.d_M), ("omega", self.omega),
            ("eta_L", "zeta" if self.eta_L_is_zeta else self.eta_L), ("eta_H", self.eta_H),
            ("xi_lower", self.xi_lower), ("xi_upper", self.xi_upper), ("rho", self.rho), ("phi", self.phi),
            ("R", self.R), ("R_hat", self.R_hat), ("r_hat", self.r_hat),
            ("r_upper", self.r_upper), ("r_lower", self.r_lower),
        ]
        if self.eta_L_is_zeta:
            rows.insert(10, ("zeta", self.eta_L))
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value if isinstance(value, str) else fmt(value)}"
                         for name, value in rows)


class ConvergenceReport(BaseModel):
    """Everything measured on one run, plus the theoretical bounds it is checked against."""

    scenario: str
    seed: int | None = None
    engine: str
    status: str
    k_bar: int | None
    steps: int = Field(..., description="Index of the last trace row")
    gamma: float

    W_series: list[float]
    delta_x_star_series: list[float]
    eta_series: list[float]

    # Mixing bounds
    eta_L: float
    eta_H: float
    eta_max_observed: float | None = None
    eta_bound_exceeded: bool = False
    eta_exceedance_steps: list[int] = Field(default_factory=list)

    # Contraction
    rho: int
    r_upper: float
    r_lower: float
    r_hat: float
    R_index: float
    R_hat: float
    eps_lower: float
    eps_upper: float
    eps_realized: float | None = None
    eps_in_bounds: bool | None = None
    empirical_rho_contractions: list[float]
    contraction: ContractionCheck
    product_column_ok: bool | None = Field(None, description="None when n is too large to form the products")
    product_column_min: float | None = None

    # Invariants
    max_mean_drift: float
    norm_monotone: bool
    constraint_violations: int
    max_constraint_excess: float
    final_consensus_error: float
    final_objective: float
    objective_in_bounds: bool

    # Geometry
    alpha: float = 0.0
    rebased_references: list[float] | None = None
    within_height_bounds: bool | None = None

    # Distributed cost / comparison
    mcp_messages_total: int = 0
    compare_max_deviation: float | None = None
    compare_eta_max_deviation: float | None = None
