"""Baseline algorithms sharing the oracles of the extrapolated solver."""

import time
from dataclasses import dataclass

import numpy as np

from .problem import IterateTrace, SolveReport
from .psg import ExtrapolationState, extrapolation_coeffs


@dataclass(frozen=True)
class BaselineParams:
    """Fixed step size and stopping rule for GPPA / pDCAe."""

    step_tau: float
    max_iter: int = 3000
    stop_rel_tol: float = 1e-8
    extrapolation: bool = False  # pDCAe momentum on/off
    restart_period: int = 50

    def __post_init__(self):
        if self.step_tau <= 0:
            raise ValueError("step_tau must be positive")
        if self.max_iter <= 0:
            raise ValueError("max_iter must be positive")
        if self.stop_rel_tol < 0:
            raise ValueError("stop_rel_tol must be nonnegative")


def _iterate(spec, x0, params, momentum):
    x = np.array(x0, dtype=float)
    if spec.is_feasible is not None and not spec.is_feasible(x):
        raise ValueError("starting point is infeasible")
    tau = params.step_tau
    trace = IterateTrace(iterates=[] if x.size <= 2048 else None)
    f0 = spec.objective(x)
    trace.record(f0, 0.0, f0, 0.0, 0.0, 0.0, x)

    state = ExtrapolationState()
    x_prev = x.copy()
    status = "max-iter"
    iterations = 0
    worst = 0.0
    t0 = time.perf_counter()
    for n in range(params.max_iter):
        if momentum:
            theta, _, state = extrapolation_coeffs(
                state, 1.0, 0.0, tau, params.restart_period
            )
        else:
            theta = 0.0
        g_n = spec.subgrad_g(x)
        y = x + theta * (x - x_prev)
        grad = spec.map_A.adjoint(spec.grad_h(spec.map_A.apply(y)))
        x_next = spec.prox_fC(y - tau * grad + tau * g_n, tau)
        if not np.all(np.isfinite(x_next)):
            raise FloatingPointError("non-finite iterate at iteration %d" % n)

        step = float(np.linalg.norm(x_next - x))
        fval = spec.objective(x_next)
        worst = max(worst, fval - trace.objective[-1])
        trace.record(fval, step, fval, theta, 0.0, tau, x_next)

        xn_norm = float(np.linalg.norm(x))
        rel = step / xn_norm if xn_norm > 0 else step
        x_prev, x = x, x_next
        iterations = n + 1
        if n >= 1 and rel < params.stop_rel_tol:
            status = "converged"
            break

    return SolveReport(
        x=x,
        objective=trace.objective[-1],
        iterations=iterations,
        status=status,
        trace=trace,
        lyapunov_c=0.0,
        max_lyapunov_violation=worst,
        wall_time=time.perf_counter() - t0,
    )


def gppa_solve(spec, x0, params):
    """Generalized proximal point algorithm: fixed-step, no extrapolation.

    x_{n+1} = prox_{tau (f + i_C)}(x_n - tau grad(h o A)(x_n) + tau g_n).
    """
    return _iterate(spec, x0, params, momentum=False)


def pdcae_solve(spec, x0, params):
    """Proximal difference-of-convex iteration with FISTA-type momentum.

    y_n = x_n + theta_n (x_n - x_{n-1}) with theta_n = (kappa_{n-1}-1)/kappa_n
    (reset every restart_period iterations);
    x_{n+1} = prox_{tau (f + i_C)}(y_n - tau grad(h o A)(y_n) + tau g_n),
    where g_n is taken at x_n.  Requires convex f, h o A, and g; this is a
    caller obligation, not checked here.
    """
    return _iterate(spec, x0, params, momentum=params.extrapolation)
