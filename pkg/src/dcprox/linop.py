"""Linear-map abstraction and spectral-norm estimation."""

import numpy as np


class LinearMap:
    """A linear map together with its adjoint and dimensions.

    `apply` maps input vectors of length `dim_in` to output vectors of
    length `dim_out`; `adjoint` is the transpose map.  Instances are
    immutable and safe to share across concurrent solver runs.
    """

    def __init__(self, apply, adjoint, dim_in, dim_out):
        self._apply = apply
        self._adjoint = adjoint
        self.dim_in = int(dim_in)
        self.dim_out = int(dim_out)
        if self.dim_in <= 0 or self.dim_out <= 0:
            raise ValueError("map dimensions must be positive")

    def apply(self, x):
        return self._apply(x)

    def adjoint(self, y):
        return self._adjoint(y)

    @classmethod
    def from_matrix(cls, A):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(lambda x: A @ x, lambda y: A.T @ y, A.shape[1], A.shape[0])

    @classmethod
    def identity(cls, dim):
        return cls(lambda x: x, lambda y: y, dim, dim)


def adjoint_mismatch(map_, rng=None, trials=5):
    """Max relative defect of <Ax, y> = <x, A*y> over random probes."""
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(map_.dim_in)
        y = rng.standard_normal(map_.dim_out)
        lhs = float(np.dot(map_.apply(x), y))
        rhs = float(np.dot(x, map_.adjoint(y)))
        scale = max(abs(lhs), abs(rhs), 1.0)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


class SpectralNormError(RuntimeError):
    def __init__(self, message, last_estimate):
        super().__init__(message)
        self.last_estimate = last_estimate


def spectral_norm(map_, tol=1e-9, max_iter=5000, seed=0):
    """Certified upper bound on the spectral norm of a LinearMap.

    Runs power iteration on A*A from a seeded start vector and returns the
    converged estimate inflated by (1 + tol), so the result can safely be
    used in step-size denominators that require an upper bound on ||A||.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(map_.dim_in)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = map_.adjoint(map_.apply(v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # v is in the null space; the norm along this start is 0.
            return 0.0
        sigma_new = np.sqrt(nw)
        v = w / nw
        if abs(sigma_new - sigma) <= tol * max(sigma_new, 1e-300):
            return sigma_new * (1.0 + tol)
        sigma = sigma_new
    raise SpectralNormError(
        "power iteration did not converge in %d iterations" % max_iter, sigma
    )
