"""Brute-force reference oracles shared by the unit and acceptance tests."""

import itertools

import numpy as np

from dcprox.polyhedron import PolyhedralSet


def as_inequalities(set_):
    """All constraints of a box+inequality set as rows A x <= b."""
    rows = [set_.G] if len(set_.g) else []
    rhs = [set_.g] if len(set_.g) else []
    eye = np.eye(set_.dim)
    fin_hi = np.isfinite(set_.hi)
    fin_lo = np.isfinite(set_.lo)
    rows += [eye[fin_hi], -eye[fin_lo]]
    rhs += [set_.hi[fin_hi], -set_.lo[fin_lo]]
    return np.vstack(rows), np.concatenate(rhs)


def combinatorial_projection(set_, w, feas_tol=1e-9):
    """Exhaustive active-set oracle: try every candidate set of size <= dim.

    Solves the equality-constrained projection for each subset of the
    inequality rows and returns the feasible candidate closest to w.
    Only valid for sets without equality constraints.
    """
    assert len(set_.e) == 0
    A, b = as_inequalities(set_)
    best = None
    best_dist = np.inf
    for k in range(min(set_.dim, len(b)) + 1):
        for subset in itertools.combinations(range(len(b)), k):
            if not subset:
                cand = w
            else:
                As, bs = A[list(subset)], b[list(subset)]
                lam, *_ = np.linalg.lstsq(As @ As.T, As @ w - bs, rcond=None)
                cand = w - As.T @ lam
            if np.max(A @ cand - b) > feas_tol:
                continue
            dist = np.linalg.norm(cand - w)
            if dist < best_dist - 1e-12:
                best_dist, best = dist, cand
    return best


def random_polytope(rng, max_dim=8, max_rows=10):
    """Random nonempty box+halfspace polytope with the origin inside."""
    d = int(rng.integers(1, max_dim + 1))
    n_in = int(rng.integers(1, 4))
    G = rng.standard_normal((n_in, d))
    g = rng.uniform(0.2, 1.5, n_in)  # origin strictly inside
    lo = np.full(d, -np.inf)
    hi = np.full(d, np.inf)
    n_boxed = min(d, (max_rows - n_in) // 2)
    boxed = rng.choice(d, size=n_boxed, replace=False)
    lo[boxed] = -rng.uniform(0.3, 1.5, n_boxed)
    hi[boxed] = rng.uniform(0.3, 1.5, n_boxed)
    return PolyhedralSet(d, G=G, g=g, lo=lo, hi=hi)
