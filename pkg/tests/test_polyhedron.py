import numpy as np
import pytest
from oracle_helpers import combinatorial_projection, random_polytope

from dcprox.polyhedron import (
    InfeasiblePolyhedronError,
    PolyhedralSet,
    PolyhedronProjector,
    ProjectionError,
    feasible_point,
    project,
)


def test_validation():
    with pytest.raises(ValueError):
        PolyhedralSet(2, G=np.ones((1, 3)), g=np.ones(1))
    with pytest.raises(ValueError):
        PolyhedralSet(2, lo=np.ones(2), hi=np.zeros(2))
    with pytest.raises(ValueError):
        PolyhedronProjector(PolyhedralSet(2), tol=0.0)


def test_residual_and_contains():
    set_ = PolyhedralSet(2, E=np.array([[1.0, 1.0]]), e=np.array([1.0]),
                         lo=np.zeros(2), hi=np.ones(2))
    assert set_.contains(np.array([0.5, 0.5]))
    assert not set_.contains(np.array([2.0, -1.0]))
    assert set_.residual(np.array([0.5, 0.5])) < 1e-15


def test_interior_point_is_fixed():
    set_ = PolyhedralSet(3, lo=-np.ones(3), hi=np.ones(3))
    w = np.array([0.2, -0.3, 0.9])
    assert np.allclose(project(set_, w), w)


def test_box_projection_is_clip():
    set_ = PolyhedralSet(3, lo=-np.ones(3), hi=np.ones(3))
    w = np.array([5.0, -2.0, 0.1])
    assert np.allclose(project(set_, w), [1.0, -1.0, 0.1], atol=1e-10)


def test_affine_projection_exact():
    # Projection onto {x : sum x = 1} has closed form.
    set_ = PolyhedralSet(4, E=np.ones((1, 4)), e=np.array([1.0]))
    w = np.array([1.0, 2.0, 3.0, 4.0])
    want = w - (w.sum() - 1.0) / 4.0
    assert np.allclose(project(set_, w), want, atol=1e-12)


def test_matches_combinatorial_oracle():
    rng = np.random.default_rng(0)
    for _ in range(40):
        set_ = random_polytope(rng)
        w = rng.standard_normal(set_.dim) * 2.0
        got = project(set_, w, tol=1e-8)
        want = combinatorial_projection(set_, w)
        assert want is not None
        assert np.linalg.norm(got - want) <= 1e-6


def test_idempotent_and_nonexpansive():
    rng = np.random.default_rng(1)
    for _ in range(20):
        set_ = random_polytope(rng)
        proj = PolyhedronProjector(set_, tol=1e-8)
        w = rng.standard_normal(set_.dim) * 3.0
        v = rng.standard_normal(set_.dim) * 3.0
        pw, pv = proj.project(w), proj.project(v)
        assert np.linalg.norm(proj.project(pw) - pw) <= 1e-7
        assert np.linalg.norm(pw - pv) <= np.linalg.norm(w - v) + 1e-7


def test_projection_with_equalities_certifies():
    rng = np.random.default_rng(2)
    E = rng.standard_normal((3, 7))
    e = rng.standard_normal(3) * 0.1
    set_ = PolyhedralSet(7, E=E, e=e, lo=-np.ones(7), hi=np.ones(7))
    x = project(set_, rng.standard_normal(7))
    assert set_.residual(x) <= 1e-8


def test_inconsistent_equalities_raise():
    E = np.array([[1.0, 0.0], [1.0, 0.0]])
    e = np.array([0.0, 1.0])
    with pytest.raises(InfeasiblePolyhedronError):
        PolyhedronProjector(PolyhedralSet(2, E=E, e=e))


def test_empty_inequality_system_raises():
    # x1 >= 2 (via -x1 <= -2) conflicts with the box x1 <= 1.
    set_ = PolyhedralSet(2, G=np.array([[-1.0, 0.0]]), g=np.array([-2.0]),
                         lo=-np.ones(2), hi=np.ones(2))
    with pytest.raises((ProjectionError, InfeasiblePolyhedronError)):
        feasible_point(set_)


def test_feasible_point_satisfies_constraints():
    rng = np.random.default_rng(3)
    for _ in range(5):
        set_ = random_polytope(rng)
        x = feasible_point(set_, tol=1e-9)
        assert set_.contains(x, tol=1e-8)
