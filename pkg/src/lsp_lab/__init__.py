"""Optimal zigzag plans for searching a line, and their asymptotic laws.

The package splits into density construction and classification
(density_kit), the turning-point solver with its finite-horizon oracle
(solver), closed-form growth laws (asymptotics), and quantitative
checks against Monte Carlo and the laws (verify).  The cli module ties
them into a reproducible file-based workflow.
"""

from .asymptotics import (
    AsymptoticPrediction,
    IncrementLimit,
    closed_form_xk,
    compact_residual_law,
    fit_compact_constant,
    increment_trichotomy,
    index_integral,
    invert_index,
    pareto_rate,
    predict_increment,
    predict_sequence,
)
from .density_kit import (
    DensityModel,
    TailClass,
    classify_tail,
    compact_fast,
    compact_power,
    custom,
    exponential,
    first_abs_moment,
    gumbel_hazard,
    log_boundary,
    lognormal,
    lomax,
    parse_spec,
    stretched_exp,
    triangular,
    uniform,
)
from .errors import (
    BracketError,
    ClassificationError,
    ConvergenceError,
    DomainError,
    InfiniteMeanError,
    LspLabError,
    NonMonotonePredicateError,
    NotApplicableError,
    WindowError,
)
from .solver import (
    ShootResult,
    SolverConfig,
    TurningSequence,
    find_x1,
    finite_horizon_optimize,
    recurrence_residual,
    recurrence_step,
    shoot_forward,
    solve,
)
from .verify import (
    ComparisonReport,
    GrowthReport,
    MonteCarloEstimate,
    ObjectiveValue,
    check_growth_bounds,
    compare,
    expected_search_time_exact,
    expected_search_time_mc,
    objective_value,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticPrediction",
    "BracketError",
    "ClassificationError",
    "ComparisonReport",
    "ConvergenceError",
    "DensityModel",
    "DomainError",
    "GrowthReport",
    "IncrementLimit",
    "InfiniteMeanError",
    "LspLabError",
    "MonteCarloEstimate",
    "NonMonotonePredicateError",
    "NotApplicableError",
    "ObjectiveValue",
    "ShootResult",
    "SolverConfig",
    "TailClass",
    "TurningSequence",
    "WindowError",
    "check_growth_bounds",
    "classify_tail",
    "closed_form_xk",
    "compact_fast",
    "compact_power",
    "compact_residual_law",
    "compare",
    "custom",
    "expected_search_time_exact",
    "expected_search_time_mc",
    "exponential",
    "find_x1",
    "finite_horizon_optimize",
    "first_abs_moment",
    "fit_compact_constant",
    "gumbel_hazard",
    "increment_trichotomy",
    "index_integral",
    "invert_index",
    "log_boundary",
    "lognormal",
    "lomax",
    "objective_value",
    "pareto_rate",
    "parse_spec",
    "predict_increment",
    "predict_sequence",
    "recurrence_residual",
    "recurrence_step",
    "shoot_forward",
    "solve",
    "stretched_exp",
    "triangular",
    "uniform",
]
