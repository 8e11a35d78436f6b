"""Positivity-preserving DG solver for nonlinear nonlocal Fokker-Planck equations."""

from ._core import (
    DGField,
    DiagRecord,
    ConvergenceRow,
    ErrorNorms,
    Integrator,
    LimiterReport,
    ProblemSpec,
    RunResult,
    SchemeParams,
    Solver,
    SolverAbort,
    apply_limiter,
    beta0_lower_bound,
    cell_min,
    cli_main,
    convergence_study,
    default_params,
    error_norms,
    example,
    example_summaries,
    run_property_suite,
)

__all__ = [
    "DGField",
    "DiagRecord",
    "ConvergenceRow",
    "ErrorNorms",
    "Integrator",
    "LimiterReport",
    "ProblemSpec",
    "RunResult",
    "SchemeParams",
    "Solver",
    "SolverAbort",
    "apply_limiter",
    "beta0_lower_bound",
    "cell_min",
    "cli_main",
    "convergence_study",
    "default_params",
    "error_norms",
    "example",
    "example_summaries",
    "run_property_suite",
]
