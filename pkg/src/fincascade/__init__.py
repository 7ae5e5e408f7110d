"""Cascading failure simulation and stabilizing control for financial
cross-holding networks."""

from .analysis import (
    ConditionReport,
    EquilibriumResult,
    FailureBoundBox,
    InvarianceResult,
    check_bounded_failure,
    check_decoupling,
    check_offset_nonneg,
    check_row_sum_stability,
    equilibrium,
    threshold_income,
    verify_invariance,
)
from .cascade_estimate import (
    CascadeEstimate,
    LargeNetParams,
    binom_tail,
    count_function,
    estimate_failures,
    estimate_from_network,
    safety_threshold,
    survival_probabilities,
)
from .control import (
    ClosedLoop,
    ClosedLoopRun,
    ControlPlan,
    InvestmentSolution,
    assemble_closed_loop,
    build_lp1,
    build_lp2,
    clamp_demands,
    default_slack,
    design_K,
    design_u1,
    design_u1_bounded,
    simulate_closed_loop,
    solve_investments,
)
from .dynamics import (
    FailureEvent,
    OrthantSystem,
    SystemState,
    Trajectory,
    coupling_matrix,
    failure_penalty,
    orthant_system,
    signature_of,
    simulate,
    state_from_equity,
    state_from_error,
    step_equity,
    step_error,
    step_orthant,
)
from .errors import (
    ConfigError,
    DegenerateScale,
    DimensionMismatch,
    FincascadeError,
    HeterogeneousWeights,
    InfeasibleEps,
    InvalidSlack,
    InvalidSpec,
    LpInfeasible,
    LpUnbounded,
    NetworkFormatError,
    NonPositiveExternalFraction,
    NumericalBreakdown,
    SingularMatrix,
)
from .harness import (
    ControlSpec,
    InitialSpec,
    MarketSpec,
    RunSummary,
    ScenarioConfig,
    initial_errors,
    preset_baseline100,
    run,
    snapshot_clusters,
)
from .lp_solver import LinearProgram, LpSolution, solve_lp
from .network import (
    FinancialNetwork,
    GeneratedHoldings,
    NetworkGenSpec,
    external_fractions,
    generate_cross_holdings,
    load_network,
    save_network,
    validate,
)
from .numerics import solve_linear, spectral_radius_bound

__version__ = "0.1.0"

__all__ = [
    "ConditionReport",
    "EquilibriumResult",
    "FailureBoundBox",
    "InvarianceResult",
    "check_bounded_failure",
    "check_decoupling",
    "check_offset_nonneg",
    "check_row_sum_stability",
    "equilibrium",
    "threshold_income",
    "verify_invariance",
    "CascadeEstimate",
    "LargeNetParams",
    "binom_tail",
    "count_function",
    "estimate_failures",
    "estimate_from_network",
    "safety_threshold",
    "survival_probabilities",
    "ClosedLoop",
    "ClosedLoopRun",
    "ControlPlan",
    "InvestmentSolution",
    "assemble_closed_loop",
    "build_lp1",
    "build_lp2",
    "clamp_demands",
    "default_slack",
    "design_K",
    "design_u1",
    "design_u1_bounded",
    "simulate_closed_loop",
    "solve_investments",
    "FailureEvent",
    "OrthantSystem",
    "SystemState",
    "Trajectory",
    "coupling_matrix",
    "failure_penalty",
    "orthant_system",
    "signature_of",
    "simulate",
    "state_from_equity",
    "state_from_error",
    "step_equity",
    "step_error",
    "step_orthant",
    "ConfigError",
    "DegenerateScale",
    "DimensionMismatch",
    "FincascadeError",
    "HeterogeneousWeights",
    "InfeasibleEps",
    "InvalidSlack",
    "InvalidSpec",
    "LpInfeasible",
    "LpUnbounded",
    "NetworkFormatError",
    "NonPositiveExternalFraction",
    "NumericalBreakdown",
    "SingularMatrix",
    "ControlSpec",
    "InitialSpec",
    "MarketSpec",
    "RunSummary",
    "ScenarioConfig",
    "initial_errors",
    "preset_baseline100",
    "run",
    "snapshot_clusters",
    "LinearProgram",
    "LpSolution",
    "solve_lp",
    "FinancialNetwork",
    "GeneratedHoldings",
    "NetworkGenSpec",
    "external_fractions",
    "generate_cross_holdings",
    "load_network",
    "save_network",
    "validate",
    "solve_linear",
    "spectral_radius_bound",
]
