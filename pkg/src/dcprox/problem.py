"""Problem and parameter data model shared by all solvers."""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .linop import LinearMap


@dataclass(frozen=True)
class ProblemSpec:
    """The quadruple (f + indicator-of-C, h, g, A) plus its constants.

    prox_fC(w, tau) returns a minimizer of f(x) + i_C(x) + ||x - w||^2/(2 tau);
    grad_h evaluates the gradient of the smooth term at points of the image
    space of map_A; subgrad_g returns one limiting subgradient of g.
    lipschitz_ell is the Lipschitz modulus of grad_h, weak_convexity_beta the
    weak-convexity modulus of g, norm_A a certified upper bound on ||A||.
    """

    prox_fC: Callable[[np.ndarray, float], np.ndarray]
    grad_h: Callable[[np.ndarray], np.ndarray]
    subgrad_g: Callable[[np.ndarray], np.ndarray]
    value_f: Callable[[np.ndarray], float]
    value_h: Callable[[np.ndarray], float]
    value_g: Callable[[np.ndarray], float]
    map_A: LinearMap
    lipschitz_ell: float
    norm_A: float
    weak_convexity_beta: float = 0.0
    is_feasible: Optional[Callable[[np.ndarray], bool]] = None

    def __post_init__(self):
        if self.lipschitz_ell < 0 or self.weak_convexity_beta < 0 or self.norm_A < 0:
            raise ValueError("lipschitz_ell, weak_convexity_beta, norm_A must be >= 0")

    def objective(self, x):
        return (
            self.value_f(x)
            + self.value_h(self.map_A.apply(x))
            - self.value_g(x)
        )


@dataclass(frozen=True)
class SolverParams:
    """Step-size and extrapolation parameters of the extrapolated solver."""

    lambda_bar: float = 0.1
    mu_bar: float = 0.01
    delta: float = 5e-25
    restart_period: Optional[int] = 50
    max_iter: int = 3000
    stop_rel_tol: float = 1e-8
    tau_sequence: Optional[Sequence[float]] = None
    keep_iterates: Optional[bool] = None

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.lambda_bar < 0 or self.mu_bar < 0:
            raise ValueError("lambda_bar and mu_bar must be nonnegative")
        if self.stop_rel_tol < 0:
            raise ValueError("stop_rel_tol must be nonnegative")
        if self.max_iter <= 0:
            raise ValueError("max_iter must be positive")
        if self.restart_period is not None and self.restart_period <= 0:
            raise ValueError("restart_period must be positive or None")


def tau_upper_bound(spec, params):
    """Largest admissible constant step size for the extrapolated solver.

    Equals 1 / (beta + 2 delta + ell ||A||^2 (2 lambda_bar + 1) + 2 mu_bar).
    """
    denom = (
        spec.weak_convexity_beta
        + 2.0 * params.delta
        + spec.lipschitz_ell * spec.norm_A**2 * (2.0 * params.lambda_bar + 1.0)
        + 2.0 * params.mu_bar
    )
    if denom <= 0:
        raise ValueError("step-size rule degenerate")
    return 1.0 / denom


@dataclass
class IterateTrace:
    """Per-iteration scalars (and optionally iterates) of a solver run.

    objective[n] holds F(x_n), step_norms[n] holds ||x_n - x_{n-1}||
    (zero for n = 0 since x_{-1} = x_0), lyapunov[n] the value
    F(x_n) + c ||x_n - x_{n-1}||^2 for the c of the run.
    """

    objective: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    lyapunov: list = field(default_factory=list)
    lambdas: list = field(default_factory=list)
    mus: list = field(default_factory=list)
    taus: list = field(default_factory=list)
    iterates: Optional[list] = None

    def record(self, obj, step, lyap, lam, mu, tau, x=None):
        self.objective.append(float(obj))
        self.step_norms.append(float(step))
        self.lyapunov.append(float(lyap))
        self.lambdas.append(float(lam))
        self.mus.append(float(mu))
        self.taus.append(float(tau))
        if self.iterates is not None and x is not None:
            self.iterates.append(np.array(x, copy=True))

    def __len__(self):
        return len(self.objective)


@dataclass
class SolveReport:
    """Outcome of one solver run."""

    x: np.ndarray
    objective: float
    iterations: int
    status: str  # "converged" | "max-iter"
    trace: IterateTrace
    lyapunov_c: float
    max_lyapunov_violation: float
    wall_time: float
