"""DC optimal power flow with photovoltaic placement on a 14-bus feeder.

Assembles the relaxed placement model as a difference-of-convex objective
over a polyhedral feasible set, loads the bundled network data, and
post-processes solutions (rounding the placement indicators, dollar costs).
The AC branch-flow model is ingested and serialized only, never solved.
"""

import csv
import importlib.resources
import json
import pathlib
from dataclasses import dataclass, field

import numpy as np

from .linop import LinearMap
from .polyhedron import PolyhedralSet, PolyhedronProjector, feasible_point
from .problem import ProblemSpec

N_BUS = 14
DOLLARS_PER_UNIT = 1_040_000.0

#: directed links of the branch-flow model: a source link into the
#: generator bus plus the feeder tree oriented away from it.
AC_LINKS = (
    (0, 11), (11, 10), (11, 12), (10, 7), (12, 13), (12, 14),
    (7, 5), (7, 8), (7, 9), (5, 4), (5, 6), (4, 2), (2, 3), (2, 1),
)


class NetworkLoadError(RuntimeError):
    pass


@dataclass(frozen=True)
class NetworkData:
    """Per-unit network parameters of the 14-bus case study."""

    demand_p: np.ndarray       # active demand D_i, pu
    demand_q: np.ndarray       # reactive demand D^Q_i, pu
    susceptance: np.ndarray    # b_ij, diagonal = -row sum of neighbors
    resistance: np.ndarray     # r_ij, zero diagonal
    reactance: np.ndarray      # X_ij, zero diagonal
    generator_buses: tuple     # 1-based bus ids
    base_power_mva: float
    base_voltage_kv: float
    cost_a: float
    cost_b: float
    cost_c: float
    pv_unit_cost: float
    p_pv_max: float
    q_pv_max: float
    p_g_max: float
    q_g_max: float
    line_p_max: float
    line_q_max: float
    v_max: float
    v_min: float
    i_max: float
    i_min: float
    gamma: float

    @property
    def total_demand(self):
        return float(self.demand_p.sum())


def _read_matrix(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        buses = [int(v) for v in header[1:]]
        rows = {int(r[0]): [float(v) for v in r[1:]] for r in reader}
    if buses != list(range(1, N_BUS + 1)) or sorted(rows) != buses:
        raise NetworkLoadError("missing bus in %s" % path)
    return np.array([rows[i] for i in buses])


def load_network(data_dir=None):
    """NetworkData from a directory of CSV files (bundled data by default).

    Expects params.csv (key,value), demand.csv (bus,active_pu,reactive_pu)
    and 14 x 14 bus matrices susceptance.csv, resistance.csv, reactance.csv.
    All files carry per-unit values already.
    """
    if data_dir is None:
        data_dir = importlib.resources.files("dcprox") / "data"
    data_dir = pathlib.Path(str(data_dir))
    try:
        with open(data_dir / "params.csv", newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            params = {k: v for k, v in reader}
        with open(data_dir / "demand.csv", newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            dem = {int(r[0]): (float(r[1]), float(r[2])) for r in reader}
        b = _read_matrix(data_dir / "susceptance.csv")
        r = _read_matrix(data_dir / "resistance.csv")
        x = _read_matrix(data_dir / "reactance.csv")
    except (OSError, ValueError, KeyError, StopIteration) as exc:
        raise NetworkLoadError("malformed network files: %s" % exc) from exc

    if sorted(dem) != list(range(1, N_BUS + 1)):
        raise NetworkLoadError("missing bus in demand.csv")
    demand_p = np.array([dem[i][0] for i in range(1, N_BUS + 1)])
    demand_q = np.array([dem[i][1] for i in range(1, N_BUS + 1)])
    if np.any(demand_p < 0) or np.any(demand_q < 0):
        raise NetworkLoadError("negative demand")
    for name, M in (("susceptance", b), ("resistance", r), ("reactance", x)):
        if np.max(np.abs(M - M.T)) > 1e-12:
            raise NetworkLoadError("%s matrix asymmetric beyond 1e-12" % name)
    for name, M in (("resistance", r), ("reactance", x)):
        if np.any(np.diag(M) != 0):
            raise NetworkLoadError("%s diagonal must be zero" % name)
    off = b - np.diag(np.diag(b))
    if np.max(np.abs(np.diag(b) + off.sum(axis=1))) > 1e-9 * np.max(np.abs(b)):
        raise NetworkLoadError("susceptance diagonal must equal -row sum")

    caps = ("p_pv_max_pu", "q_pv_max_pu", "p_g_max_pu", "q_g_max_pu",
            "line_p_max_pu", "line_q_max_pu")
    try:
        if any(float(params[k]) <= 0 for k in caps):
            raise NetworkLoadError("capacities must be positive")
        return _build_network(params, demand_p, demand_q, b, r, x)
    except (KeyError, ValueError) as exc:
        raise NetworkLoadError("malformed params.csv: %s" % exc) from exc


def _build_network(params, demand_p, demand_q, b, r, x):
    return NetworkData(
        demand_p=demand_p,
        demand_q=demand_q,
        susceptance=b,
        resistance=r,
        reactance=x,
        generator_buses=tuple(
            int(v) for v in str(params["generator_buses"]).split(";")
        ),
        base_power_mva=float(params["base_power_mva"]),
        base_voltage_kv=float(params["base_voltage_kv"]),
        cost_a=float(params["cost_a"]),
        cost_b=float(params["cost_b"]),
        cost_c=float(params["cost_c"]),
        pv_unit_cost=float(params["pv_unit_cost"]),
        p_pv_max=float(params["p_pv_max_pu"]),
        q_pv_max=float(params["q_pv_max_pu"]),
        p_g_max=float(params["p_g_max_pu"]),
        q_g_max=float(params["q_g_max_pu"]),
        line_p_max=float(params["line_p_max_pu"]),
        line_q_max=float(params["line_q_max_pu"]),
        v_max=float(params["v_max_pu"]),
        v_min=float(params["v_min_pu"]),
        i_max=float(params["i_max_pu"]),
        i_min=float(params["i_min_pu"]),
        gamma=float(params["gamma"]),
    )


@dataclass(frozen=True)
class DCOPFLayout:
    """Index map of x = [P^PV (14), P^G, X (14), theta (14), P (14 x 14)]."""

    dim: int = 14 + 1 + 14 + 14 + N_BUS * N_BUS  # 239
    ppv: slice = slice(0, 14)
    pg: int = 14
    x_bin: slice = slice(15, 29)
    theta: slice = slice(29, 43)
    flow: slice = slice(43, 239)

    def flow_index(self, i, j):
        """Flat index of P_ij for 0-based buses i, j (row-major)."""
        return self.flow.start + N_BUS * i + j

    def pack(self, ppv, pg, x_bin, theta, flow):
        x = np.empty(self.dim)
        x[self.ppv] = ppv
        x[self.pg] = pg
        x[self.x_bin] = x_bin
        x[self.theta] = theta
        x[self.flow] = np.asarray(flow).reshape(-1)
        return x

    def unpack(self, x):
        return (
            x[self.ppv].copy(),
            float(x[self.pg]),
            x[self.x_bin].copy(),
            x[self.theta].copy(),
            x[self.flow].reshape(N_BUS, N_BUS).copy(),
        )


def build_dcopf(net, gamma=None, projection_tol=1e-9, check_feasible=True):
    """Assemble the relaxed placement problem.

    Returns (ProblemSpec, PolyhedralSet, DCOPFLayout) with
    h(x) = sum_i C X_i + sum_{i in M} (a (P^G_i)^2 + b P^G_i + c)
           - sum_i P^PV_i / sum_i D_i,
    g(x) = gamma sum_i (X_i^2 - X_i) (differentiable, so subgrad_g = grad g),
    and f the indicator of the polyhedron S of flow physics, slack angle,
    nodal balance, 50% penetration, line/capacity/indicator bounds.
    The angle box is [-2 pi, 2 pi]: with the slack angle pinned to zero a
    one-sided box would force every angle difference, hence every flow, to
    be zero and make the model trivially infeasible in spirit.
    """
    gamma = net.gamma if gamma is None else float(gamma)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    lay = DCOPFLayout()
    d = lay.dim
    gens = [g - 1 for g in net.generator_buses]
    b = net.susceptance
    total_d = net.total_demand

    E_rows, e_rhs = [], []
    # Flow physics P_ij = b_ij (theta_i - theta_j) for every ordered pair;
    # on the diagonal the angle terms cancel, pinning P_ii = 0.
    for i in range(N_BUS):
        for j in range(N_BUS):
            row = np.zeros(d)
            row[lay.flow_index(i, j)] = 1.0
            row[lay.theta.start + i] -= b[i, j]
            row[lay.theta.start + j] += b[i, j]
            E_rows.append(row)
            e_rhs.append(0.0)
    # Slack bus angle.
    row = np.zeros(d)
    row[lay.theta.start + gens[0]] = 1.0
    E_rows.append(row)
    e_rhs.append(0.0)
    # Nodal balance: generation minus demand equals net outflow.
    for i in range(N_BUS):
        row = np.zeros(d)
        for j in range(N_BUS):
            if j != i:
                row[lay.flow_index(i, j)] = 1.0
        row[lay.ppv.start + i] = -1.0
        if i in gens:
            row[lay.pg] = -1.0
        E_rows.append(row)
        e_rhs.append(-net.demand_p[i])

    G_rows, g_rhs = [], []
    # Penetration: sum P^PV >= 0.5 sum D.
    row = np.zeros(d)
    row[lay.ppv] = -1.0
    G_rows.append(row)
    g_rhs.append(-0.5 * total_d)
    # PV output only where an indicator is on: P^PV_i <= X_i Pbar^PV.
    for i in range(N_BUS):
        row = np.zeros(d)
        row[lay.ppv.start + i] = 1.0
        row[lay.x_bin.start + i] = -net.p_pv_max
        G_rows.append(row)
        g_rhs.append(0.0)

    lo = np.full(d, -np.inf)
    hi = np.full(d, np.inf)
    lo[lay.ppv], hi[lay.ppv] = 0.0, net.p_pv_max
    lo[lay.pg], hi[lay.pg] = 0.0, net.p_g_max
    lo[lay.x_bin], hi[lay.x_bin] = 0.0, 1.0
    lo[lay.theta], hi[lay.theta] = -2.0 * np.pi, 2.0 * np.pi
    lo[lay.flow], hi[lay.flow] = -net.line_p_max, net.line_p_max

    set_ = PolyhedralSet(
        d, np.array(E_rows), np.array(e_rhs), np.array(G_rows), np.array(g_rhs),
        lo, hi,
    )
    projector = PolyhedronProjector(set_, tol=projection_tol)
    if check_feasible:
        feasible_point(set_, tol=projection_tol)

    a, b_cost, c = net.cost_a, net.cost_b, net.cost_c
    C_pv = net.pv_unit_cost
    n_gen = len(gens)

    def value_h(x):
        pg = x[lay.pg]
        return float(
            C_pv * x[lay.x_bin].sum()
            + a * pg * pg + b_cost * pg + n_gen * c
            - x[lay.ppv].sum() / total_d
        )

    def grad_h(x):
        grad = np.zeros(d)
        grad[lay.ppv] = -1.0 / total_d
        grad[lay.pg] = 2.0 * a * x[lay.pg] + b_cost
        grad[lay.x_bin] = C_pv
        return grad

    def value_g(x):
        xb = x[lay.x_bin]
        return float(gamma * np.sum(xb * xb - xb))

    def grad_g(x):
        grad = np.zeros(d)
        grad[lay.x_bin] = gamma * (2.0 * x[lay.x_bin] - 1.0)
        return grad

    spec = ProblemSpec(
        prox_fC=lambda w, tau: projector.project(w),
        grad_h=grad_h,
        subgrad_g=grad_g,
        value_f=lambda x: 0.0,
        value_h=value_h,
        value_g=value_g,
        map_A=LinearMap.identity(d),
        lipschitz_ell=2.0 * a,
        norm_A=1.0,
        is_feasible=lambda x: set_.contains(x, tol=1e-6),
    )
    return spec, set_, lay


def binary_relaxation_gap(x, layout):
    """sum_i max(0, X_i (1 - X_i)): zero iff every indicator is binary."""
    xb = x[layout.x_bin]
    return float(np.sum(np.maximum(xb - xb * xb, 0.0)))


@dataclass
class PlanReport:
    """Rounded placement decision with its dispatch and dollar costs."""

    placement: tuple          # 1-based bus ids with a PV system
    fractional: bool          # True if some X_i missed both endpoints
    objective: float
    pv_dispatch: np.ndarray
    generator_dispatch: float
    penetration: float
    install_cost_units: float
    generation_cost_units: float
    total_cost_units: float
    total_cost_dollars: float
    baseline_cost_units: float = None
    cost_reduction: float = None
    flags: list = field(default_factory=list)

    def to_dict(self):
        out = dict(self.__dict__)
        out["pv_dispatch"] = [float(v) for v in self.pv_dispatch]
        out["placement"] = list(self.placement)
        return out

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def table(self):
        lines = [
            "placement buses   : %s" % (list(self.placement),),
            "objective         : %.6f" % self.objective,
            "penetration       : %.4f" % self.penetration,
            "generator P (pu)  : %.6f" % self.generator_dispatch,
            "install cost      : {:.3f} units (${:,.0f})".format(
                self.install_cost_units, self.install_cost_units * DOLLARS_PER_UNIT
            ),
            "generation cost   : %.3f units" % self.generation_cost_units,
            "total cost        : {:.3f} units (${:,.0f})".format(
                self.total_cost_units, self.total_cost_dollars
            ),
        ]
        if self.cost_reduction is not None:
            lines.append("cost reduction    : %.1f%%" % (100 * self.cost_reduction))
        if self.flags:
            lines.append("flags             : %s" % "; ".join(self.flags))
        return "\n".join(lines)


def postprocess_solution(x, net, layout, round_tol=1e-3, baseline_cost=None,
                         gamma=None):
    """Round the indicators and report placement, dispatch, and costs.

    Indicators within round_tol of {0, 1} are snapped; any other value marks
    the report as an unrounded relaxation.  baseline_cost (in cost units) is
    the pre-optimization operating cost supplied by the caller; when given,
    the relative cost reduction is reported against it.
    """
    gamma = net.gamma if gamma is None else float(gamma)
    ppv, pg, xb, _, _ = layout.unpack(x)
    rounded = np.round(xb)
    fractional = bool(np.any(np.abs(xb - rounded) > round_tol))
    flags = ["unrounded relaxation"] if fractional else []
    placement = tuple(int(i) + 1 for i in np.flatnonzero(rounded > 0.5))

    a, b, c = net.cost_a, net.cost_b, net.cost_c
    gen_cost = a * pg * pg + b * pg + c * len(net.generator_buses)
    install = net.pv_unit_cost * float(rounded.sum())
    total_units = install + gen_cost
    penetration = float(ppv.sum() / net.total_demand)
    objective = (
        install + gen_cost - penetration
        - gamma * float(np.sum(xb * xb - xb))
    )
    reduction = None
    if baseline_cost is not None:
        reduction = 1.0 - total_units / baseline_cost
    return PlanReport(
        placement=placement,
        fractional=fractional,
        objective=objective,
        pv_dispatch=ppv,
        generator_dispatch=pg,
        penetration=penetration,
        install_cost_units=install,
        generation_cost_units=gen_cost,
        total_cost_units=total_units,
        total_cost_dollars=total_units * DOLLARS_PER_UNIT,
        baseline_cost_units=baseline_cost,
        cost_reduction=reduction,
        flags=flags,
    )


@dataclass(frozen=True)
class ACModel:
    """Branch-flow placement model: variable layout and symbolic constraints.

    Construction and serialization only; solving the nonconvex model is out
    of scope.  The decision vector is
    [P^G, Q^G, v_1..14, I^_e (14), P_e (14), Q_e (14), P^PV (14),
    Q^PV (14), X (14)] with links ordered as in AC_LINKS.
    """

    links: tuple
    var_names: tuple
    constraints: tuple      # (kind, text) pairs
    bounds: tuple           # (name, lo, hi) triples

    @property
    def dim(self):
        return len(self.var_names)

    def constraint_tally(self):
        tally = {}
        for kind, _ in self.constraints:
            tally[kind] = tally.get(kind, 0) + 1
        return tally

    def index(self, name):
        return self.var_names.index(name)

    def serialize(self):
        return json.dumps(
            {
                "links": [list(l) for l in self.links],
                "variables": list(self.var_names),
                "constraints": [list(c) for c in self.constraints],
                "bounds": [[n, lo, hi] for n, lo, hi in self.bounds],
            },
            indent=2,
        )


def load_ac_model(net):
    """ACModel for the bundled network: 14 directed links, 100 variables."""
    links = AC_LINKS
    gen = net.generator_buses[0]
    # Spanning check: every bus reached once from the source link.
    heads = [j for _, j in links]
    if sorted(heads) != list(range(1, N_BUS + 1)) or links[0] != (0, gen):
        raise ValueError("link set is not a spanning arborescence from the source")
    reached = {0}
    for i, j in links:
        if i not in reached:
            raise ValueError("link set is not a spanning arborescence from the source")
        reached.add(j)

    names = ["P_G_%d" % gen, "Q_G_%d" % gen]
    names += ["v_%d" % i for i in range(1, N_BUS + 1)]
    for tag in ("Ihat", "P", "Q"):
        names += ["%s_%d_%d" % (tag, i, j) for i, j in links]
    for tag in ("P_PV", "Q_PV", "X"):
        names += ["%s_%d" % (tag, i) for i in range(1, N_BUS + 1)]

    out_links = {i: [(a, b) for a, b in links if a == i] for i in range(N_BUS + 1)}
    cons = [("source-pin", "P_0_%d = 0" % gen), ("source-pin", "Q_0_%d = 0" % gen)]
    for i, j in links:
        for sym, pv, loss, dem, qual in (
            ("P", "P_PV", "r", net.demand_p, "active"),
            ("Q", "Q_PV", "Xr", net.demand_q, "reactive"),
        ):
            outflow = " + ".join(
                "%s_%d_%d" % (sym, a, b) for a, b in out_links[j]
            ) or "0"
            gen_term = " + %s_G_%d" % (sym, j) if j in net.generator_buses else (
                " - %s_%d_%d*Ihat_%d_%d" % (loss, i, j, i, j)
            )
            cons.append((
                "%s-balance" % qual,
                "%s_%d_%d + %s_%d%s - %.6g = %s"
                % (sym, i, j, pv, j, gen_term, dem[j - 1], outflow),
            ))
    for i, j in links:
        cons.append((
            "voltage-drop",
            "v_%d = v_%d - 2*(r_%d_%d*P_%d_%d + Xr_%d_%d*Q_%d_%d)"
            " + (r_%d_%d^2 + Xr_%d_%d^2)*Ihat_%d_%d"
            % (j, i, i, j, i, j, i, j, i, j, i, j, i, j, i, j),
        ))
    for i, j in links:
        cons.append((
            "current-flow",
            "Ihat_%d_%d*v_%d = P_%d_%d^2 + Q_%d_%d^2" % (i, j, i, i, j, i, j),
        ))
    cons.append((
        "penetration",
        "sum_i P_PV_i >= %.6g" % (0.5 * net.total_demand),
    ))
    for i in range(1, N_BUS + 1):
        cons.append(("pv-coupling", "0 <= P_PV_%d <= X_%d*%.6g" % (i, i, net.p_pv_max)))
        cons.append(("pv-coupling", "0 <= Q_PV_%d <= X_%d*%.6g" % (i, i, net.q_pv_max)))

    bounds = [("P_G_%d" % gen, 0.0, net.p_g_max), ("Q_G_%d" % gen, 0.0, net.q_g_max)]
    bounds += [("v_%d" % i, net.v_min**2, net.v_max**2) for i in range(1, N_BUS + 1)]
    bounds += [("Ihat_%d_%d" % l, net.i_min**2, net.i_max**2) for l in links]
    bounds += [("P_%d_%d" % l, -net.line_p_max, net.line_p_max) for l in links]
    bounds += [("Q_%d_%d" % l, -net.line_q_max, net.line_q_max) for l in links]
    bounds += [("X_%d" % i, 0.0, 1.0) for i in range(1, N_BUS + 1)]
    return ACModel(
        links=links,
        var_names=tuple(names),
        constraints=tuple(cons),
        bounds=tuple(bounds),
    )
