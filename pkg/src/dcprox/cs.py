"""Sparse-recovery instance generation and problem assembly."""

import csv
import json
import pathlib
from dataclasses import dataclass

import numpy as np

from .linop import LinearMap, spectral_norm
from .oracles import L1L2Regularizer, Loss, norm_subgradient, soft_threshold
from .problem import ProblemSpec

#: case id -> (matrix kind, m, d, s)
CASES = {
    1: ("gaussian", 180, 640, 20),
    2: ("gaussian", 360, 1280, 40),
    3: ("gaussian", 720, 2560, 80),
    4: ("gaussian", 2880, 10240, 320),
    5: ("dct", 180, 640, 20),
    6: ("dct", 360, 1280, 40),
    7: ("dct", 720, 2560, 80),
    8: ("dct", 2880, 10240, 320),
}


def gen_gaussian(m, d, seed, mode="raw"):
    """m x d Gaussian sensing matrix.

    mode selects the conditioning of the ensemble:
      "raw"          i.i.d. standard normal entries,
      "scaled"       entries N(0, 1/m), the usual compressed-sensing scaling,
      "orthonormal"  rows orthonormalized (QR of the transpose), so that
                     A A^T = I and the spectral norm is exactly 1.
    Full row rank is verified and the draw is repeated on failure
    (probability ~ 0).
    """
    if m > d:
        raise ValueError("need m <= d")
    if mode not in ("raw", "scaled", "orthonormal"):
        raise ValueError("unknown mode %r" % (mode,))
    rng = np.random.default_rng(seed)
    for _ in range(8):
        A = rng.standard_normal((m, d))
        if mode == "orthonormal":
            Q, _ = np.linalg.qr(A.T)
            return np.ascontiguousarray(Q[:, :m].T)
        s = np.linalg.svd(A, compute_uv=False)
        if s[-1] > 1e-10 * s[0]:
            return A / np.sqrt(m) if mode == "scaled" else A
    raise RuntimeError("failed to draw a full-row-rank Gaussian matrix")


def gen_dct(m, d, seed):
    """m distinct rows, sampled uniformly, of the d x d orthonormal DCT-II.

    Rows are orthonormal, so A A^T = I and the spectral norm is exactly 1.
    """
    if m > d:
        raise ValueError("need m <= d")
    rng = np.random.default_rng(seed)
    rows = np.sort(rng.choice(d, size=m, replace=False))
    n = np.arange(d)
    A = np.cos(np.pi * (2 * n + 1)[None, :] * rows[:, None] / (2 * d))
    A *= np.sqrt(2.0 / d)
    A[rows == 0] = np.sqrt(1.0 / d)
    return A


def gen_ground_truth(d, s, seed):
    """s-sparse vector: uniform random support, standard normal values."""
    if not 1 <= s <= d:
        raise ValueError("need 1 <= s <= d")
    rng = np.random.default_rng(seed)
    idx = rng.choice(d, size=s, replace=False)
    x = np.zeros(d)
    x[idx] = rng.standard_normal(s)
    return x


def ground_truth_error(x, x_g):
    """Relative recovery error ||x - x_g|| / ||x_g||."""
    scale = np.linalg.norm(x_g)
    if scale == 0:
        raise ValueError("ground truth must be nonzero")
    return float(np.linalg.norm(x - x_g) / scale)


@dataclass(frozen=True)
class CSInstance:
    """One sensing matrix, target, and ground truth with its regularizer."""

    A: np.ndarray
    b: np.ndarray
    x_g: np.ndarray
    gamma: float
    loss_kind: str
    seed: int
    matrix_kind: str
    s: int

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def d(self):
        return self.A.shape[1]


def make_instance(case, seed, gamma, loss_kind, gauss_mode=None):
    """Instance for one benchmark case (Table of test cases) and seed.

    The target is the noiseless measurement b = A x_g.  Gaussian cases use
    the 1/sqrt(m)-scaled ensemble for the least-squares loss and the
    row-orthonormal ensemble for the Lorentzian loss unless gauss_mode
    overrides the choice.
    """
    kind, m, d, s = CASES[case] if isinstance(case, int) else case
    if gauss_mode is None:
        gauss_mode = "scaled" if loss_kind == "least-squares" else "orthonormal"
    mat_seed, gt_seed = (int(v) for v in np.random.SeedSequence(seed).generate_state(2))
    if kind == "gaussian":
        A = gen_gaussian(m, d, mat_seed, mode=gauss_mode)
    elif kind == "dct":
        A = gen_dct(m, d, mat_seed)
    else:
        raise ValueError("unknown matrix kind %r" % (kind,))
    x_g = gen_ground_truth(d, s, gt_seed)
    return CSInstance(
        A=A, b=A @ x_g, x_g=x_g, gamma=float(gamma),
        loss_kind=loss_kind, seed=int(seed), matrix_kind=kind, s=int(s),
    )


def build_cs_problem(inst, norm_tol=1e-9):
    """ProblemSpec with f = gamma ||.||_1, h = loss, g = gamma ||.||."""
    reg = L1L2Regularizer(inst.gamma)
    loss = Loss(inst.loss_kind, inst.b)
    map_A = LinearMap.from_matrix(inst.A)
    gamma = reg.gamma
    return ProblemSpec(
        prox_fC=lambda w, tau: soft_threshold(w, gamma * tau),
        grad_h=loss.grad,
        subgrad_g=lambda x: gamma * norm_subgradient(x),
        value_f=lambda x: gamma * float(np.abs(x).sum()),
        value_h=loss.value,
        value_g=lambda x: gamma * float(np.linalg.norm(x)),
        map_A=map_A,
        lipschitz_ell=loss.lipschitz,
        norm_A=spectral_norm(map_A, tol=norm_tol),
    )


def save_instance(inst, out_dir):
    """Write the instance as a CSV bundle (matrix, b, x_g, metadata)."""
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "matrix.csv", inst.A, delimiter=",", fmt="%.17g")
    np.savetxt(out / "b.csv", inst.b, delimiter=",", fmt="%.17g")
    np.savetxt(out / "ground_truth.csv", inst.x_g, delimiter=",", fmt="%.17g")
    meta = {
        "gamma": inst.gamma, "loss_kind": inst.loss_kind, "seed": inst.seed,
        "matrix_kind": inst.matrix_kind, "s": inst.s, "m": inst.m, "d": inst.d,
    }
    with open(out / "meta.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["key", "value"])
        for k, v in meta.items():
            writer.writerow([k, json.dumps(v)])


def load_instance(in_dir):
    """Read an instance bundle written by save_instance."""
    src = pathlib.Path(in_dir)
    A = np.loadtxt(src / "matrix.csv", delimiter=",", ndmin=2)
    b = np.loadtxt(src / "b.csv", delimiter=",")
    x_g = np.loadtxt(src / "ground_truth.csv", delimiter=",")
    meta = {}
    with open(src / "meta.csv", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for k, v in reader:
            meta[k] = json.loads(v)
    return CSInstance(
        A=A, b=b, x_g=x_g, gamma=meta["gamma"], loss_kind=meta["loss_kind"],
        seed=meta["seed"], matrix_kind=meta["matrix_kind"], s=meta["s"],
    )
