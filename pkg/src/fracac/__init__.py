"""Time-fractional Allen-Cahn solvers built on backward-Euler convolution
quadrature, with the diagnostics needed to check their discrete invariants."""

from __future__ import annotations

from fracac.cq import (
    CQWeights,
    cq_positivity_functional,
    cq_weights,
    extrapolation_coefficients,
    frac_derivative,
    frac_extrapolation,
)
from fracac.diagnostics import (
    DiagnosticsSeries,
    energy,
    frac_energy_derivative,
    max_principle_monitor,
    observed_rate,
    self_convergence_error,
)
from fracac.initial import initial_condition
from fracac.mittag_leffler import MLEvalConfig, linear_subdiffusion_exact
from fracac.schemes import (
    Scheme,
    SchemeConfig,
    SolverState,
    StepFailure,
    Trajectory,
    newton_solve_cubic_helmholtz,
    run,
    step_cs,
    step_lws,
    step_wcs,
)
from fracac.spatial import (
    ConvergenceError,
    Field,
    GridSpec,
    apply_laplacian,
    l2_norm,
    max_norm,
    solve_helmholtz,
)

__version__ = "0.1.0"

__all__ = [
    "CQWeights",
    "ConvergenceError",
    "DiagnosticsSeries",
    "Field",
    "GridSpec",
    "MLEvalConfig",
    "Scheme",
    "SchemeConfig",
    "SolverState",
    "StepFailure",
    "Trajectory",
    "apply_laplacian",
    "cq_positivity_functional",
    "cq_weights",
    "energy",
    "extrapolation_coefficients",
    "frac_derivative",
    "frac_energy_derivative",
    "frac_extrapolation",
    "initial_condition",
    "l2_norm",
    "linear_subdiffusion_exact",
    "max_norm",
    "max_principle_monitor",
    "newton_solve_cubic_helmholtz",
    "observed_rate",
    "run",
    "self_convergence_error",
    "solve_helmholtz",
    "step_cs",
    "step_lws",
    "step_wcs",
]
