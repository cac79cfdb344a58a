"""Extrapolated proximal subgradient solver for difference-of-convex
composite problems, with sparse-recovery and power-flow case studies."""

from .baselines import BaselineParams, gppa_solve, pdcae_solve
from .linop import LinearMap, adjoint_mismatch, spectral_norm
from .oracles import (
    L1L2Regularizer,
    Loss,
    lorentzian_value_grad,
    least_squares_value_grad,
    norm_subgradient,
    soft_threshold,
)
from .polyhedron import (
    InfeasiblePolyhedronError,
    PolyhedralSet,
    PolyhedronProjector,
    ProjectionError,
    feasible_point,
    project,
)
from .problem import (
    IterateTrace,
    ProblemSpec,
    SolveReport,
    SolverParams,
    tau_upper_bound,
)
from .psg import (
    ExtrapolationState,
    check_decrease,
    extrapolation_coeffs,
    lyapunov_c,
    psg_step,
    solve,
    tail_linear_fit,
)

__all__ = [
    "BaselineParams", "gppa_solve", "pdcae_solve",
    "LinearMap", "adjoint_mismatch", "spectral_norm",
    "L1L2Regularizer", "Loss", "lorentzian_value_grad",
    "least_squares_value_grad", "norm_subgradient", "soft_threshold",
    "InfeasiblePolyhedronError", "PolyhedralSet", "PolyhedronProjector",
    "ProjectionError", "feasible_point", "project",
    "IterateTrace", "ProblemSpec", "SolveReport", "SolverParams",
    "tau_upper_bound",
    "ExtrapolationState", "check_decrease", "extrapolation_coeffs",
    "lyapunov_c", "psg_step", "solve", "tail_linear_fit",
]

__version__ = "0.1.0"
