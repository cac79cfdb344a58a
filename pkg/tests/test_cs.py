import numpy as np
import pytest
import scipy.fft

from dcprox import cs


def test_case_table_shapes():
    assert cs.CASES[1] == ("gaussian", 180, 640, 20)
    assert cs.CASES[4] == ("gaussian", 2880, 10240, 320)
    assert cs.CASES[5] == ("dct", 180, 640, 20)
    assert cs.CASES[8] == ("dct", 2880, 10240, 320)
    for kind, m, d, s in cs.CASES.values():
        assert m < d and s < m


def test_gen_gaussian_modes():
    A = cs.gen_gaussian(30, 80, 0)
    assert A.shape == (30, 80)
    assert abs(A.std() - 1.0) < 0.1
    B = cs.gen_gaussian(30, 80, 0, mode="scaled")
    assert np.allclose(B * np.sqrt(30), A)
    Q = cs.gen_gaussian(30, 80, 0, mode="orthonormal")
    assert np.max(np.abs(Q @ Q.T - np.eye(30))) < 1e-12


def test_gen_gaussian_full_row_rank():
    A = cs.gen_gaussian(25, 60, 7)
    s = np.linalg.svd(A, compute_uv=False)
    assert s[-1] > 1e-8


def test_gen_gaussian_errors():
    with pytest.raises(ValueError):
        cs.gen_gaussian(10, 5, 0)
    with pytest.raises(ValueError):
        cs.gen_gaussian(5, 10, 0, mode="banana")


def test_gen_dct_rows_of_orthonormal_transform():
    m, d = 12, 32
    A = cs.gen_dct(m, d, 3)
    assert A.shape == (m, d)
    assert np.max(np.abs(A @ A.T - np.eye(m))) < 1e-12
    full = scipy.fft.dct(np.eye(d), norm="ortho", axis=0)
    # every generated row appears among the rows of the full transform
    for row in A:
        assert np.min(np.max(np.abs(full - row[None, :]), axis=1)) < 1e-12


def test_gen_ground_truth_sparsity():
    x = cs.gen_ground_truth(200, 15, 4)
    assert x.shape == (200,)
    assert np.count_nonzero(x) == 15
    with pytest.raises(ValueError):
        cs.gen_ground_truth(10, 0, 0)
    with pytest.raises(ValueError):
        cs.gen_ground_truth(10, 11, 0)


def test_ground_truth_error():
    x_g = np.array([3.0, 4.0])
    assert cs.ground_truth_error(x_g, x_g) == 0.0
    assert abs(cs.ground_truth_error(np.zeros(2), x_g) - 1.0) < 1e-15
    with pytest.raises(ValueError):
        cs.ground_truth_error(np.zeros(2), np.zeros(2))


def test_make_instance_deterministic_and_noiseless():
    a = cs.make_instance(1, 5, 0.1, "least-squares")
    b = cs.make_instance(1, 5, 0.1, "least-squares")
    assert np.array_equal(a.A, b.A)
    assert np.array_equal(a.x_g, b.x_g)
    assert np.allclose(a.b, a.A @ a.x_g)
    assert (a.m, a.d, a.s) == (180, 640, 20)
    c = cs.make_instance(1, 6, 0.1, "least-squares")
    assert not np.array_equal(a.A, c.A)


def test_make_instance_per_loss_ensembles():
    ls = cs.make_instance(1, 0, 0.1, "least-squares")
    lz = cs.make_instance(1, 0, 0.001, "lorentzian")
    assert np.max(np.abs(lz.A @ lz.A.T - np.eye(lz.m))) < 1e-12
    assert np.max(np.abs(ls.A @ ls.A.T - np.eye(ls.m))) > 1e-6


def test_build_cs_problem_objective_at_origin():
    inst = cs.make_instance(("gaussian", 20, 50, 4), 0, 0.1, "least-squares")
    spec = cs.build_cs_problem(inst)
    zero = np.zeros(inst.d)
    assert abs(spec.objective(zero) - 0.5 * inst.b @ inst.b) < 1e-12
    assert spec.lipschitz_ell == 1.0
    x = np.zeros(inst.d)
    x[0] = 2.0
    # f - g = gamma (|x|_1 - |x|) vanishes on one-sparse vectors
    assert abs(spec.value_f(x) - spec.value_g(x)) < 1e-15


def test_build_cs_problem_prox_uses_scaled_threshold():
    inst = cs.make_instance(("gaussian", 20, 50, 4), 0, 0.1, "least-squares")
    spec = cs.build_cs_problem(inst)
    w = np.linspace(-1, 1, inst.d)
    assert np.allclose(spec.prox_fC(w, 2.0),
                       cs.soft_threshold(w, 0.2), atol=1e-15)


def test_norm_estimate_matches_svd():
    inst = cs.make_instance(("gaussian", 20, 50, 4), 1, 0.1, "least-squares")
    spec = cs.build_cs_problem(inst)
    exact = np.linalg.norm(inst.A, 2)
    assert abs(spec.norm_A - exact) <= exact * 1e-8


def test_save_load_round_trip(tmp_path):
    inst = cs.make_instance(("dct", 16, 40, 3), 9, 0.001, "lorentzian")
    cs.save_instance(inst, tmp_path / "bundle")
    back = cs.load_instance(tmp_path / "bundle")
    assert np.array_equal(back.A, inst.A)
    assert np.array_equal(back.b, inst.b)
    assert np.array_equal(back.x_g, inst.x_g)
    assert back.gamma == inst.gamma
    assert back.loss_kind == inst.loss_kind
    assert back.matrix_kind == inst.matrix_kind
    assert back.s == inst.s
