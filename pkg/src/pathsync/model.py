"""Assembly of the time-discretized coordination MILP.

Variables per robot i and knot k: position s_i^k, speed v_i^k, entered/exited
indicators mu_i^k and sigma_i^k.  Per conflict component between robots i and
j: the priority pair pi_ij/pi_ji and eight threshold indicators telling
whether each robot has entered/left the parallel and perpendicular parts of
the completed collision set.  All implications are lowered to big-M rows
whose constants are derived from the referenced columns' bounds, never from
a global constant.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .geometry import ConflictZone, RobotSpec

__all__ = [
    "ModelError",
    "Discretization",
    "VariableIndex",
    "Column",
    "LinearConstraint",
    "ImplicationRecord",
    "ModelOptions",
    "MilpModel",
    "build_model",
    "set_objective",
    "add_monotonicity_cuts",
    "fix_receding_horizon",
    "fix_priorities",
    "make_discretization",
    "reachability_envelope",
]

_EPS_KINDS = ("eps_par_in", "eps_par_out", "eps_perp_in", "eps_perp_out")
_TOL = 1e-9


class ModelError(ValueError):
    """Invalid input to model construction."""


@dataclass(frozen=True)
class Discretization:
    """Fixed time step duration and the number of steps in the horizon."""

    tau: float
    K: int

    def __post_init__(self) -> None:
        if self.tau <= 0.0:
            raise ModelError("tau must be positive")
        if self.K < 1:
            raise ModelError("K must be at least 1")


def make_discretization(robots: Sequence[RobotSpec], tau: float,
                        horizon: float = 30.0) -> Discretization:
    """K covers the latest entry plus the given horizon."""
    t_latest = max((r.t_in for r in robots), default=0.0)
    return Discretization(tau=tau, K=int(math.ceil((t_latest + horizon) / tau)))


@dataclass(frozen=True)
class VariableIndex:
    """Structured identity of one model column."""

    kind: str
    robot: str | None = None
    pair: tuple[str, str] | None = None
    component: int | None = None
    side: str | None = None
    k: int | None = None

    _SHORT = {"sigma": "sg", "eps_par_in": "epi", "eps_par_out": "epo",
              "eps_perp_in": "eqi", "eps_perp_out": "eqo"}

    def name(self) -> str:
        code = self._SHORT.get(self.kind, self.kind)
        if self.kind in ("s", "v", "mu", "sigma"):
            return f"{code}_{self.robot}_{self.k}"
        if self.kind == "pi":
            return f"pi_{self.pair[0]}_{self.pair[1]}_c{self.component}"
        return f"{code}_{self.pair[0]}_{self.pair[1]}_c{self.component}_{self.side}_{self.k}"


@dataclass
class Column:
    index: VariableIndex
    lb: float
    ub: float
    is_binary: bool


@dataclass
class LinearConstraint:
    """Sparse row `sum(coeffs) sense rhs`; tag names its family for diagnostics."""

    coeffs: dict[int, float]
    sense: str  # '<=', '=', '>='
    rhs: float
    tag: str


@dataclass
class ImplicationRecord:
    """Big-M provenance: which literals switch which condition, and the rows
    that encode it (used by the tightness checks)."""

    literals: tuple[tuple[int, int], ...]
    coeffs: dict[int, float]
    sense: str
    rhs: float
    rows: tuple[int, ...]
    tag: str


@dataclass
class ModelOptions:
    tie_break: bool = True
    cuts: bool = True
    presolve: bool = True

    @property
    def tighten_bounds(self) -> bool:
        # Per-knot position caps are only valid once the monotonicity cuts
        # rule out rewinding after an exit.
        return self.cuts and self.presolve


@dataclass
class MilpModel:
    columns: list[Column]
    constraints: list[LinearConstraint]
    objective: dict[int, float]  # maximized
    tau: float
    K: int
    col_of: dict[VariableIndex, int]
    robots: list[RobotSpec]
    groups: list["ZoneGroup"]
    implications: list[ImplicationRecord]
    meta: dict

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    def binary_columns(self) -> list[int]:
        return [c for c, col in enumerate(self.columns) if col.is_binary]

    def column(self, index: VariableIndex) -> int:
        return self.col_of[index]

    def value(self, x: np.ndarray, index: VariableIndex) -> float:
        return float(x[self.col_of[index]])

    def with_bounds(self, fixes: Mapping[int, tuple[float, float]]) -> "MilpModel":
        """Copy of the model with some column bounds replaced."""
        cols = list(self.columns)
        for c, (lo, hi) in fixes.items():
            cols[c] = replace(cols[c], lb=lo, ub=hi)
        return replace(self, columns=cols)


@dataclass
class ZoneGroup:
    """One conflict component: the two directed zones plus its variable ids."""

    a: str
    b: str
    component: int
    fwd: ConflictZone  # a has priority
    rev: ConflictZone  # b has priority

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.a, self.b, self.component)

    def eps_threshold(self, kind: str, side: str) -> float:
        fwd, rev = self.fwd, self.rev
        table = {
            ("eps_perp_out", "i"): fwd.s_perp_hi_i,
            ("eps_perp_in", "j"): fwd.s_perp_lo_j,
            ("eps_par_in", "j"): fwd.s_par_lo_j,
            ("eps_par_out", "i"): fwd.s_par_hi_i,
            ("eps_perp_out", "j"): rev.s_perp_hi_i,
            ("eps_perp_in", "i"): rev.s_perp_lo_j,
            ("eps_par_in", "i"): rev.s_par_lo_j,
            ("eps_par_out", "j"): rev.s_par_hi_i,
        }
        return table[(kind, side)]

    def side_of(self, robot: str) -> str:
        return "i" if robot == self.a else "j"


def group_zones(robots: Sequence[RobotSpec],
                zones: Sequence[ConflictZone]) -> list[ZoneGroup]:
    ids = {r.id for r in robots}
    partial: dict[tuple[str, str, int], dict[str, ConflictZone]] = {}
    order: list[tuple[str, str, int]] = []
    for z in zones:
        if z.robot_i not in ids or z.robot_j not in ids:
            raise ModelError(f"zone references unknown robot {z.robot_i!r}/{z.robot_j!r}")
        if z.robot_i == z.robot_j:
            raise ModelError(f"zone must reference two distinct robots, got {z.robot_i!r}")
        a, b = sorted((z.robot_i, z.robot_j))
        key = (a, b, z.component)
        slot = "fwd" if z.robot_i == a else "rev"
        entry = partial.setdefault(key, {})
        if slot in entry:
            raise ModelError(f"duplicate directed zone for pair {key}")
        entry[slot] = z
        if key not in order:
            order.append(key)
    groups = []
    for key in order:
        entry = partial[key]
        if "fwd" not in entry or "rev" not in entry:
            raise ModelError(f"conflict component {key} is missing one direction")
        groups.append(ZoneGroup(a=key[0], b=key[1], component=key[2],
                                fwd=entry["fwd"], rev=entry["rev"]))
    return groups


def reachability_envelope(spec: RobotSpec, disc: Discretization):
    """Per-knot position envelope and the max-trajectory speed profile.

    Before entry the speed is pinned to v_in, so both envelopes advance
    uniformly until the knot where the position can become nonnegative;
    from there the upper trajectory applies full acceleration and the lower
    one brakes to a stop.
    """
    K, tau = disc.K, disc.tau
    s0 = -spec.v_in * spec.t_in
    s_hi = np.empty(K + 1)
    s_lo = np.empty(K + 1)
    v_hi = np.empty(K + 1)
    s_hi[0] = s_lo[0] = s0
    v_hi[0] = spec.v_in
    vh = vl = spec.v_in
    for k in range(K):
        vn = spec.v_in if s_hi[k] < -_TOL else min(spec.v_max, vh + spec.a_max * tau)
        s_hi[k + 1] = s_hi[k] + 0.5 * tau * (vh + vn)
        vh = vn
        v_hi[k + 1] = vn
        vn = spec.v_in if s_lo[k] < -_TOL else max(0.0, vl + spec.a_min * tau)
        s_lo[k + 1] = s_lo[k] + 0.5 * tau * (vl + vn)
        vl = vn
    return s_lo, s_hi, v_hi


class _Builder:
    def __init__(self) -> None:
        self.columns: list[Column] = []
        self.col_of: dict[VariableIndex, int] = {}
        self.constraints: list[LinearConstraint] = []
        self.implications: list[ImplicationRecord] = []

    def add_column(self, index: VariableIndex, lb: float, ub: float,
                   binary: bool) -> int:
        if index in self.col_of:
            raise ModelError(f"duplicate column {index}")
        if lb > ub + _TOL:
            raise ModelError(f"column {index.name()} has empty bounds [{lb}, {ub}]")
        col = len(self.columns)
        self.columns.append(Column(index, lb, min(ub, max(lb, ub)), binary))
        self.col_of[index] = col
        return col

    def bounds(self, col: int) -> tuple[float, float]:
        return self.columns[col].lb, self.columns[col].ub

    def _interval(self, coeffs: Mapping[int, float]) -> tuple[float, float]:
        lo = hi = 0.0
        for c, a in coeffs.items():
            l, u = self.bounds(c)
            lo += a * (l if a > 0 else u)
            hi += a * (u if a > 0 else l)
        return lo, hi

    def row(self, coeffs: Mapping[int, float], sense: str, rhs: float,
            tag: str) -> int:
        clean = {c: float(a) for c, a in coeffs.items() if a != 0.0}
        if not clean:
            raise ModelError(f"empty row {tag}")
        self.constraints.append(LinearConstraint(clean, sense, float(rhs), tag))
        return len(self.constraints) - 1

    def implied(self, literals: Sequence[tuple[int, int]],
                coeffs: Mapping[int, float], sense: str, rhs: float,
                tag: str) -> None:
        """Emit `all literals at their active value => coeffs sense rhs`.

        One row per inequality; the slack constant is the row's own interval
        excess multiplied by the number of deviating literals.
        """
        if sense == "=":
            self.implied(literals, coeffs, "<=", rhs, tag)
            self.implied(literals, coeffs, ">=", rhs, tag)
            return
        lo, hi = self._interval(coeffs)
        rows = []
        merged = dict(coeffs)
        n_active = sum(1 for _, v in literals if v == 1)
        if sense == "<=":
            M = max(0.0, hi - rhs)
            for col, val in literals:
                merged[col] = merged.get(col, 0.0) + (M if val == 1 else -M)
            rows.append(self.row(merged, "<=", rhs + M * n_active, tag))
        elif sense == ">=":
            M = max(0.0, rhs - lo)
            for col, val in literals:
                merged[col] = merged.get(col, 0.0) + (-M if val == 1 else M)
            rows.append(self.row(merged, ">=", rhs - M * n_active, tag))
        else:
            raise ModelError(f"unknown sense {sense!r}")
        self.implications.append(ImplicationRecord(
            tuple((c, v) for c, v in literals), dict(coeffs), sense,
            float(rhs), tuple(rows), tag))

    def threshold_pair(self, binary: int, svar: int, theta: float, tag: str) -> None:
        """Indicator semantics `x=1 iff s >= theta`, free exactly at theta."""
        self.implied([(binary, 0)], {svar: 1.0}, "<=", theta, f"{tag}.le")
        self.implied([(binary, 1)], {svar: 1.0}, ">=", theta, f"{tag}.ge")


def _scenario_hash(robots, groups, disc, options) -> str:
    h = hashlib.sha256()
    for r in robots:
        h.update(repr((r.id, r.s_out, r.t_in, r.v_in, r.v_out, r.v_max,
                       r.a_min, r.a_max)).encode())
    for g in groups:
        for z in (g.fwd, g.rev):
            h.update(repr((z.robot_i, z.robot_j, z.component,
                           z.s_par_lo_i, z.s_par_hi_i, z.s_par_lo_j, z.s_par_hi_j,
                           z.s_perp_lo_i, z.s_perp_hi_i, z.s_perp_lo_j, z.s_perp_hi_j,
                           z.offset_aij)).encode())
    h.update(repr((disc.tau, disc.K, options.tie_break, options.cuts,
                   options.presolve)).encode())
    return h.hexdigest()[:16]


def build_model(robots: Sequence[RobotSpec], zones: Sequence[ConflictZone],
                disc: Discretization,
                options: ModelOptions | None = None) -> MilpModel:
    """Assemble columns, all constraint families and the objective."""
    options = options or ModelOptions()
    robots = list(robots)
    if len({r.id for r in robots}) != len(robots):
        raise ModelError("robot ids must be unique")
    if not robots:
        raise ModelError("need at least one robot")
    groups = group_zones(robots, zones)

    b = _Builder()
    K, tau = disc.K, disc.tau

    envelopes = {r.id: reachability_envelope(r, disc) for r in robots}

    # --- columns -----------------------------------------------------------
    for r in robots:
        s_lo, s_hi, v_hi = envelopes[r.id]
        glob_lo = -r.v_in * r.t_in
        glob_hi = r.s_out + r.v_max * K * tau
        for k in range(K + 1):
            if k == 0:
                lo, hi = glob_lo, glob_lo
            elif options.tighten_bounds:
                lo, hi = s_lo[k], s_hi[k]
            else:
                lo, hi = glob_lo, glob_hi
            b.add_column(VariableIndex("s", robot=r.id, k=k), lo, hi, False)
        for k in range(K + 1):
            pinned = k == 0 or (k >= 1 and s_hi[k - 1] < -_TOL)
            if pinned:
                lo, hi = r.v_in, r.v_in
            elif options.tighten_bounds:
                lo, hi = 0.0, v_hi[k]
            else:
                lo, hi = 0.0, r.v_max
            b.add_column(VariableIndex("v", robot=r.id, k=k), lo, hi, False)
        for k in range(K + 1):
            lo, hi = _binary_fix(options, s_lo[k], s_hi[k], 0.0)
            b.add_column(VariableIndex("mu", robot=r.id, k=k), lo, hi, True)
        for k in range(K + 1):
            lo, hi = _binary_fix(options, s_lo[k], s_hi[k], r.s_out)
            b.add_column(VariableIndex("sigma", robot=r.id, k=k), lo, hi, True)

    for g in groups:
        b.add_column(VariableIndex("pi", pair=(g.a, g.b), component=g.component),
                     0.0, 1.0, True)
        b.add_column(VariableIndex("pi", pair=(g.b, g.a), component=g.component),
                     0.0, 1.0, True)
        for kind in _EPS_KINDS:
            for side in ("i", "j"):
                rid = g.a if side == "i" else g.b
                s_lo, s_hi, _ = envelopes[rid]
                theta = g.eps_threshold(kind, side)
                for k in range(K + 1):
                    lo, hi = _binary_fix(options, s_lo[k], s_hi[k], theta)
                    b.add_column(
                        VariableIndex(kind, pair=(g.a, g.b),
                                      component=g.component, side=side, k=k),
                        lo, hi, True)

    col = b.col_of

    def s(rid, k):
        return col[VariableIndex("s", robot=rid, k=k)]

    def v(rid, k):
        return col[VariableIndex("v", robot=rid, k=k)]

    def mu(rid, k):
        return col[VariableIndex("mu", robot=rid, k=k)]

    def sg(rid, k):
        return col[VariableIndex("sigma", robot=rid, k=k)]

    def pi(g, winner):
        loser = g.b if winner == g.a else g.a
        return col[VariableIndex("pi", pair=(winner, loser), component=g.component)]

    def eps(g, kind, side, k):
        return col[VariableIndex(kind, pair=(g.a, g.b), component=g.component,
                                 side=side, k=k)]

    # --- (h) indicator helper rows -----------------------------------------
    for r in robots:
        for k in range(K + 1):
            b.threshold_pair(mu(r.id, k), s(r.id, k), 0.0, f"h.mu[{r.id},{k}]")
            b.threshold_pair(sg(r.id, k), s(r.id, k), r.s_out, f"h.sg[{r.id},{k}]")
    for g in groups:
        for kind in _EPS_KINDS:
            for side in ("i", "j"):
                rid = g.a if side == "i" else g.b
                theta = g.eps_threshold(kind, side)
                for k in range(K + 1):
                    b.threshold_pair(eps(g, kind, side, k), s(rid, k), theta,
                                     f"h.{kind}[{g.a},{g.b},c{g.component},{side},{k}]")
        b.row({pi(g, g.a): 1.0, pi(g, g.b): 1.0}, "=", 1.0,
              f"h.pi[{g.a},{g.b},c{g.component}]")

    # --- (b) boundary rows ---------------------------------------------------
    for r in robots:
        rid = r.id
        for k in range(K):
            b.implied([(mu(rid, k), 0)], {v(rid, k + 1): 1.0}, "=", r.v_in,
                      f"b1[{rid},{k}]")
            b.implied([(sg(rid, k + 1), 1)], {v(rid, k): 1.0}, "=", r.v_out,
                      f"b2[{rid},{k}]")
        b.row({s(rid, 0): 1.0}, "=", -r.v_in * r.t_in, f"b3[{rid}]")
        b.row({s(rid, K): 1.0}, ">=", r.s_out, f"b4[{rid}]")
        b.row({v(rid, 0): 1.0}, "=", r.v_in, f"b5[{rid}]")

    # --- (k) kinodynamics ------------------------------------------------------
    for r in robots:
        rid = r.id
        for k in range(K):
            b.implied([(sg(rid, k), 0)],
                      {s(rid, k + 1): 1.0, s(rid, k): -1.0,
                       v(rid, k + 1): -tau / 2.0, v(rid, k): -tau / 2.0},
                      "=", 0.0, f"k1[{rid},{k}]")
            b.implied([(sg(rid, k), 0)],
                      {v(rid, k + 1): 1.0, v(rid, k): -1.0},
                      "<=", r.a_max * tau, f"k2[{rid},{k}]")
            b.implied([(sg(rid, k), 0)],
                      {v(rid, k + 1): 1.0, v(rid, k): -1.0},
                      ">=", r.a_min * tau, f"k3[{rid},{k}]")

    # --- (s) safety ------------------------------------------------------------
    for g in groups:
        for winner, zone in ((g.a, g.fwd), (g.b, g.rev)):
            loser = g.b if winner == g.a else g.a
            ws, ls = g.side_of(winner), g.side_of(loser)
            p = pi(g, winner)
            label = f"[{winner}>{loser},c{g.component}"
            for k in range(K):
                b.implied(
                    [(p, 1), (eps(g, "eps_perp_out", ws, k), 0)],
                    {eps(g, "eps_perp_in", ls, k + 1): 1.0}, "<=", 0.0,
                    f"s1{label},{k}]")
                if not zone.par_empty:
                    a_off = zone.offset_aij
                    gates = [(p, 1), (eps(g, "eps_par_in", ls, k), 1),
                             (eps(g, "eps_par_out", ws, k), 0)]
                    b.implied(gates,
                              {s(winner, k + 1): 1.0, s(loser, k + 1): -1.0},
                              ">=", a_off, f"s2{label},{k}]")
                    b.implied(gates,
                              {s(winner, k + 1): 1.0, s(loser, k + 1): -1.0,
                               v(winner, k + 1): tau / 2.0,
                               v(loser, k + 1): -tau / 2.0},
                              ">=", a_off, f"s3{label},{k}]")

    model = MilpModel(
        columns=b.columns, constraints=b.constraints, objective={},
        tau=tau, K=K, col_of=b.col_of, robots=robots, groups=groups,
        implications=b.implications,
        meta={"hash": _scenario_hash(robots, groups, disc, options),
              "tau": tau, "K": K, "options": options},
    )
    if options.cuts:
        add_monotonicity_cuts(model)
    set_objective(model, tie_break=options.tie_break)
    return model


def _binary_fix(options: ModelOptions, s_lo: float, s_hi: float,
                theta: float) -> tuple[float, float]:
    if options.presolve:
        if s_hi < theta - _TOL:
            return 0.0, 0.0
        if s_lo > theta + _TOL:
            return 1.0, 1.0
    return 0.0, 1.0


def set_objective(model: MilpModel, tie_break: bool = True) -> None:
    """Maximize the mean count of post-exit knots; optionally add the
    averaged normalized speed term that separates equal-exit solutions."""
    n = len(model.robots)
    obj: dict[int, float] = {}
    for r in model.robots:
        for k in range(model.K + 1):
            obj[model.column(VariableIndex("sigma", robot=r.id, k=k))] = 1.0 / n
    if tie_break:
        w = 1.0 / (n * model.K)
        for r in model.robots:
            for k in range(model.K + 1):
                c = model.column(VariableIndex("v", robot=r.id, k=k))
                obj[c] = obj.get(c, 0.0) + w / r.v_max
    model.objective = obj


def add_monotonicity_cuts(model: MilpModel) -> None:
    """Strengthening cuts valid for physical solutions.

    Indicators never step back (positions are nondecreasing while inside and
    the exit state is absorbing), and the constant-acceleration kinematics
    may be imposed unconditionally: continuing the profile past the exit at
    the pinned exit speed is always feasible, so restricting the free
    post-exit positions to that continuation loses no optimum while removing
    the big-M slack that fractional exit indicators would otherwise leak
    into the relaxation.
    """
    b = _Builder()
    b.columns = model.columns
    b.constraints = model.constraints
    b.col_of = model.col_of
    tau = model.tau
    for r in model.robots:
        rid = r.id
        for k in range(model.K):
            for kind in ("mu", "sigma"):
                c0 = model.column(VariableIndex(kind, robot=rid, k=k))
                c1 = model.column(VariableIndex(kind, robot=rid, k=k + 1))
                b.row({c0: 1.0, c1: -1.0}, "<=", 0.0,
                      f"cut.{kind}[{rid},{k}]")
            s0 = model.column(VariableIndex("s", robot=rid, k=k))
            s1 = model.column(VariableIndex("s", robot=rid, k=k + 1))
            v0 = model.column(VariableIndex("v", robot=rid, k=k))
            v1 = model.column(VariableIndex("v", robot=rid, k=k + 1))
            b.row({s1: 1.0, s0: -1.0, v1: -tau / 2.0, v0: -tau / 2.0}, "=",
                  0.0, f"cut.k1[{rid},{k}]")
            b.row({v1: 1.0, v0: -1.0}, "<=", r.a_max * tau, f"cut.k2[{rid},{k}]")
            b.row({v1: 1.0, v0: -1.0}, ">=", r.a_min * tau, f"cut.k3[{rid},{k}]")
    for g in model.groups:
        for kind in _EPS_KINDS:
            for side in ("i", "j"):
                for k in range(model.K):
                    c0 = model.column(VariableIndex(
                        kind, pair=(g.a, g.b), component=g.component,
                        side=side, k=k))
                    c1 = model.column(VariableIndex(
                        kind, pair=(g.a, g.b), component=g.component,
                        side=side, k=k + 1))
                    b.row({c0: 1.0, c1: -1.0}, "<=", 0.0,
                          f"cut.{kind}[{g.a},{g.b},c{g.component},{side},{k}]")


def fix_priorities(model: MilpModel,
                   assignment: Mapping[tuple[str, str, int], str]) -> MilpModel:
    """Pin priority binaries: assignment maps (a, b, component) -> winner id."""
    fixes: dict[int, tuple[float, float]] = {}
    for g in model.groups:
        winner = assignment.get(g.key)
        if winner is None:
            continue
        if winner not in (g.a, g.b):
            raise ModelError(f"robot {winner!r} is not part of component {g.key}")
        loser = g.b if winner == g.a else g.a
        w = model.column(VariableIndex("pi", pair=(winner, loser),
                                       component=g.component))
        l = model.column(VariableIndex("pi", pair=(loser, winner),
                                       component=g.component))
        fixes[w] = (1.0, 1.0)
        fixes[l] = (0.0, 0.0)
    return model.with_bounds(fixes)


def fix_receding_horizon(model: MilpModel,
                         committed: Mapping[VariableIndex, float],
                         new_robots: Iterable[str]) -> MilpModel:
    """Pin every column of already-planned robots to its committed value.

    Only robots in `new_robots` stay free; pairwise columns are pinned when
    both endpoints are committed.
    """
    new_ids = set(new_robots)
    committed_ids = {r.id for r in model.robots} - new_ids
    if not committed_ids.isdisjoint(new_ids):
        raise ModelError("committed and new robot sets overlap")
    fixes: dict[int, tuple[float, float]] = {}
    for idx, c in model.col_of.items():
        owners = {idx.robot} if idx.robot is not None else set(idx.pair)
        if not owners <= committed_ids:
            continue
        if idx not in committed:
            raise ModelError(f"missing committed value for {idx.name()}")
        val = float(committed[idx])
        if model.columns[c].is_binary:
            val = round(val)
        lo, hi = model.columns[c].lb, model.columns[c].ub
        if val < lo - 1e-6 or val > hi + 1e-6:
            raise ModelError(
                f"committed value {val} for {idx.name()} violates bounds [{lo}, {hi}]")
        val = min(max(val, lo), hi)
        fixes[c] = (val, val)
    return model.with_bounds(fixes)


def constraint_count_formula(n_robots: int, K: int,
                             groups: Sequence[ZoneGroup],
                             options: ModelOptions | None = None) -> int:
    """Closed-form row count used by the regression tests."""
    options = options or ModelOptions()
    z = len(groups)
    rows = 4 * n_robots * (K + 1)            # h: mu/sigma pairs
    rows += 16 * z * (K + 1) + z             # h: eps pairs + pi row
    rows += n_robots * (4 * K + 3)           # b
    rows += 4 * n_robots * K                 # k (k1 lowers to two rows)
    for g in groups:
        for zone in (g.fwd, g.rev):
            rows += K                        # s1
            if not zone.par_empty:
                rows += 2 * K                # s2, s3
    if options.cuts:
        rows += (2 * n_robots + 8 * z) * K   # indicator monotonicity
        rows += 3 * n_robots * K             # kinematic continuation
    return rows
