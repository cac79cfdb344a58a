"""Euclidean projection onto a polyhedron with certified residuals.

The projector first eliminates the equality constraints through an
orthonormal null-space basis (so equalities hold to machine precision by
construction), leaving the least-distance problem

    min ||y - w'||   s.t.   R y <= r

in the reduced coordinates.  That problem is solved exactly by the
classical reduction to nonnegative least squares (Lawson-Hanson), a finite
active-set method, and the result is certified against the original
constraint system before it is returned.
"""

import numpy as np
import scipy.optimize


class ProjectionError(RuntimeError):
    def __init__(self, message, residual, best_x=None):
        super().__init__(message)
        self.residual = residual
        self.best_x = best_x


class InfeasiblePolyhedronError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class PolyhedralSet:
    """Linear equalities, inequalities, and box bounds on R^d."""

    def __init__(self, dim, E=None, e=None, G=None, g=None, lo=None, hi=None):
        self.dim = int(dim)
        self.E = np.zeros((0, dim)) if E is None else np.atleast_2d(np.asarray(E, float))
        self.e = np.zeros(0) if e is None else np.atleast_1d(np.asarray(e, float))
        self.G = np.zeros((0, dim)) if G is None else np.atleast_2d(np.asarray(G, float))
        self.g = np.zeros(0) if g is None else np.atleast_1d(np.asarray(g, float))
        self.lo = np.full(dim, -np.inf) if lo is None else np.asarray(lo, float).copy()
        self.hi = np.full(dim, np.inf) if hi is None else np.asarray(hi, float).copy()
        if self.E.shape != (len(self.e), dim) or self.G.shape != (len(self.g), dim):
            raise ValueError("inconsistent constraint dimensions")
        if self.lo.shape != (dim,) or self.hi.shape != (dim,):
            raise ValueError("box bounds must have length dim")
        if np.any(self.lo > self.hi):
            raise ValueError("lo must be <= hi componentwise")

    def residual(self, x):
        """Max constraint violation at x (row-normalized linear rows)."""
        res = 0.0
        if len(self.e):
            scale = np.maximum(np.linalg.norm(self.E, axis=1), 1e-300)
            res = max(res, float(np.max(np.abs(self.E @ x - self.e) / scale)))
        if len(self.g):
            scale = np.maximum(np.linalg.norm(self.G, axis=1), 1e-300)
            res = max(res, float(np.max((self.G @ x - self.g) / scale)))
        res = max(res, float(np.max(np.maximum(self.lo - x, 0.0), initial=0.0)))
        res = max(res, float(np.max(np.maximum(x - self.hi, 0.0), initial=0.0)))
        return res

    def contains(self, x, tol=1e-6):
        return self.residual(x) <= tol


class PolyhedronProjector:
    """Reusable projector onto one PolyhedralSet.

    Stateless after construction, so instances are safe to share across
    concurrent solver runs.
    """

    def __init__(self, set_, tol=1e-8, max_iter=None):
        self.set = set_
        self.tol = float(tol)
        self.max_iter = max_iter
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        self._reduce()

    def _reduce(self):
        """Split off the equality constraints via an orthonormal basis.

        Afterwards x = x_p + Z y with E x = e exact, and the projection is
        the reduced problem  min ||y - Z^T (w - x_p)||  s.t.  R y <= r,
        where R stacks the general inequalities and the finite box rows.
        """
        set_ = self.set
        d = set_.dim
        if len(set_.e):
            scale = np.maximum(np.linalg.norm(set_.E, axis=1), 1e-300)
            E = set_.E / scale[:, None]
            e = set_.e / scale
            U, s, Vt = np.linalg.svd(E, full_matrices=True)
            rank = int(np.sum(s > max(E.shape) * np.finfo(float).eps * s[0]))
            x_p = Vt[:rank].T @ ((U.T[:rank] @ e) / s[:rank])
            if np.max(np.abs(E @ x_p - e)) > 1e-9 * max(1.0, np.max(np.abs(e))):
                raise InfeasiblePolyhedronError(
                    "inconsistent equality constraints",
                    float(np.max(np.abs(E @ x_p - e))),
                )
            Z = Vt[rank:].T
        else:
            x_p = np.zeros(d)
            Z = np.eye(d)
        rows = [set_.G @ Z] if len(set_.g) else []
        rhs = [set_.g - set_.G @ x_p] if len(set_.g) else []
        fin_hi = np.isfinite(set_.hi)
        fin_lo = np.isfinite(set_.lo)
        rows.append(Z[fin_hi])
        rhs.append(set_.hi[fin_hi] - x_p[fin_hi])
        rows.append(-Z[fin_lo])
        rhs.append(x_p[fin_lo] - set_.lo[fin_lo])
        R = np.vstack(rows) if rows else np.zeros((0, Z.shape[1]))
        r = np.concatenate(rhs) if rhs else np.zeros(0)
        if len(r):
            scale = np.maximum(np.linalg.norm(R, axis=1), 1e-300)
            R, r = R / scale[:, None], r / scale
        self._x_p, self._Z, self._R, self._r = x_p, Z, R, r

    def project(self, w, max_iter=None):
        """Projection of w onto the set, certified to the residual tolerance."""
        w = np.asarray(w, dtype=float)
        w_red = self._Z.T @ (w - self._x_p)
        R, r = self._R, self._r
        if len(r) == 0:
            return self._x_p + self._Z @ w_red
        # Least-distance programming via nonnegative least squares:
        # min ||p|| s.t. (-R) p >= R w' - r, then y = w' + p.
        G = -R
        h = R @ w_red - r
        n = G.shape[1]
        E = np.vstack([G.T, h[None, :]])
        f = np.zeros(n + 1)
        f[n] = 1.0
        maxit = max_iter or self.max_iter
        rho = None
        try:
            u, _ = scipy.optimize.nnls(
                E, f, maxiter=maxit if maxit else 50 * E.shape[1]
            )
            rho = E @ u - f
        except RuntimeError:
            pass
        x = self._finish(w_red, rho, n) if rho is not None else None
        if x is None or self.set.residual(x) > self.tol:
            # nnls can stall or return a suboptimal active set; fall back
            # to the slower bounded least-squares solver before giving up.
            res = scipy.optimize.lsq_linear(E, f, bounds=(0.0, np.inf),
                                            tol=1e-14)
            x = self._finish(w_red, E @ res.x - f, n)
        if x is None:
            raise ProjectionError(
                "no feasible point near the target (infeasible constraints?)",
                np.inf,
            )
        res = self.set.residual(x)
        if res > self.tol:
            raise ProjectionError(
                "projection residual %.3e exceeds tol %.1e" % (res, self.tol),
                res,
                x,
            )
        return x

    def _finish(self, w_red, rho, n):
        """Recover the projection from the residual of the dual NNLS solve."""
        if abs(rho[n]) <= 1e-12:
            return None
        p = -rho[:n] / rho[n]
        return self._x_p + self._Z @ (w_red + p)


def project(set_, w, tol=1e-8, max_iter=None):
    """One-shot projection of w onto a PolyhedralSet."""
    return PolyhedronProjector(set_, tol=tol, max_iter=max_iter).project(w)


def feasible_point(set_, tol=1e-8, max_iter=None):
    """Some point of the set, or an infeasibility signal.

    Projects the origin onto the set; if no point satisfies every
    constraint to tolerance the set is reported as possibly infeasible
    with the residual achieved.
    """
    proj = PolyhedronProjector(set_, tol=tol, max_iter=max_iter)
    try:
        return proj.project(np.zeros(set_.dim))
    except ProjectionError as err:
        raise InfeasiblePolyhedronError(
            "possibly infeasible polyhedron (best residual %.3e)" % err.residual,
            err.residual,
        ) from err
