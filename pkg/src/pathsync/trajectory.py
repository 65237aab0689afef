"""Continuous-time trajectories from solver output, and their verification.

Solver knots define a piecewise-constant-acceleration profile.  Knots after
the exit step are rebuilt as uniform motion at the exit speed (the model
deliberately leaves positions unconstrained once a robot has left), so every
trajectory here satisfies the trapezoid identity on all steps.  Verification
never trusts the optimizer: it samples pairs densely and tests them against
the collision polygons and, when path geometry is available, against actual
footprint intersection.
"""

from __future__ import annotations

import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .geometry import ConflictZone, PathGeometry, RobotSpec, rectangles_intersect, footprint
from .milp import LpSolution, SolveLimits, SolveReport, solve_milp
from .model import (
    Discretization,
    MilpModel,
    ModelOptions,
    VariableIndex,
    build_model,
    fix_priorities,
)

__all__ = [
    "TrajectoryError",
    "SafetyViolation",
    "Trajectory",
    "PriorityGraph",
    "Metrics",
    "SafetyReport",
    "extract",
    "sample",
    "verify_safety",
    "metrics",
    "enumerate_priorities_oracle",
    "OracleResult",
    "trajectories_to_csv",
    "parse_trajectories_csv",
]

INTEGRALITY_EXTRACT_TOL = 1e-4


class TrajectoryError(ValueError):
    pass


@dataclass
class Trajectory:
    """Knot sequence at t = k*tau with constant acceleration within steps."""

    robot: str
    tau: float
    t: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=float)
        self.s = np.asarray(self.s, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if not (len(self.t) == len(self.s) == len(self.v)) or len(self.t) < 2:
            raise TrajectoryError("knot arrays must share a length >= 2")
        if np.any(np.abs(np.diff(self.t) - self.tau) > 1e-9):
            raise TrajectoryError("knot spacing must equal tau")
        if np.any(self.v < -1e-9):
            raise TrajectoryError("negative speed knot")

    @property
    def accels(self) -> np.ndarray:
        return np.diff(self.v) / self.tau

    def state(self, times) -> tuple[np.ndarray, np.ndarray]:
        """Positions and speeds at arbitrary times within the horizon."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        k = np.clip((times / self.tau).astype(int), 0, len(self.t) - 2)
        dt = times - self.t[k]
        a = self.accels[k]
        v = self.v[k] + a * dt
        s = self.s[k] + self.v[k] * dt + 0.5 * a * dt * dt
        return s, v


@dataclass
class PriorityGraph:
    """Directed pass-before relation, one edge per conflict component."""

    zone_direction: dict[tuple[str, str, int], tuple[str, str]]

    @property
    def edges(self) -> set[tuple[str, str]]:
        return set(self.zone_direction.values())

    def is_acyclic(self) -> bool:
        adj: dict[str, set[str]] = {}
        for w, l in self.edges:
            adj.setdefault(w, set()).add(l)
            adj.setdefault(l, set())
        seen: dict[str, int] = {}

        def visit(u: str) -> bool:
            seen[u] = 1
            for w in adj[u]:
                state = seen.get(w, 0)
                if state == 1 or (state == 0 and not visit(w)):
                    return False
            seen[u] = 2
            return True

        return all(visit(u) for u in adj if seen.get(u, 0) == 0)


@dataclass
class SafetyViolation:
    pair: tuple[str, str]
    time: float
    config: tuple[float, float]
    kind: str  # "polygon" | "footprint"


@dataclass
class SafetyReport:
    violations: list[SafetyViolation]
    min_clearance: float

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass
class Metrics:
    t_out: dict[str, float]
    sojourn: dict[str, float]
    mean_sojourn: float
    min_clearance: float | None = None


def _solution_vector(solution) -> np.ndarray:
    if isinstance(solution, SolveReport):
        if solution.incumbent is None:
            raise TrajectoryError(f"no incumbent to extract (status {solution.status})")
        return solution.incumbent.x
    if isinstance(solution, LpSolution):
        if solution.x is None:
            raise TrajectoryError(f"no solution to extract (status {solution.status})")
        return solution.x
    return np.asarray(solution, dtype=float)


def extract(model: MilpModel, solution) -> tuple[list[Trajectory], PriorityGraph]:
    """Read knots and priorities out of a solution vector.

    Raises on fractional binaries.  Post-exit knots are rebuilt as uniform
    motion at the exit-step speed.
    """
    x = _solution_vector(solution)
    for c in model.binary_columns():
        if abs(x[c] - round(x[c])) > INTEGRALITY_EXTRACT_TOL:
            raise TrajectoryError(
                f"binary {model.columns[c].index.name()} is fractional: {x[c]}")
    tau, K = model.tau, model.K
    trajs = []
    for r in model.robots:
        s = np.array([model.value(x, VariableIndex("s", robot=r.id, k=k))
                      for k in range(K + 1)])
        v = np.array([model.value(x, VariableIndex("v", robot=r.id, k=k))
                      for k in range(K + 1)])
        sigma = np.array([model.value(x, VariableIndex("sigma", robot=r.id, k=k))
                          for k in range(K + 1)])
        exited = np.nonzero(sigma > 0.5)[0]
        if exited.size:
            k_out = int(exited[0])
            for m in range(k_out + 1, K + 1):
                v[m] = v[k_out]
                s[m] = s[k_out] + (m - k_out) * tau * v[k_out]
        trajs.append(Trajectory(robot=r.id, tau=tau,
                                t=np.arange(K + 1) * tau, s=s, v=v))
    directions = {}
    for g in model.groups:
        pi_ab = model.value(x, VariableIndex("pi", pair=(g.a, g.b),
                                             component=g.component))
        winner, loser = (g.a, g.b) if pi_ab > 0.5 else (g.b, g.a)
        directions[g.key] = (winner, loser)
    return trajs, PriorityGraph(directions)


def sample(traj: Trajectory, dt: float) -> np.ndarray:
    """Dense (t, s, v) samples on [0, K*tau]; exact at the knots."""
    if not (0.0 < dt <= traj.tau + 1e-12):
        raise TrajectoryError("need 0 < dt <= tau")
    t_end = traj.t[-1]
    times = np.arange(0.0, t_end + dt * 0.5, dt)
    times[-1] = min(times[-1], t_end)
    s, v = traj.state(times)
    return np.column_stack([times, s, v])


def _canonical_zones(zones: Sequence[ConflictZone]) -> list[ConflictZone]:
    """One polygon per conflict component (drop the transposed duplicates)."""
    seen = set()
    out = []
    for z in zones:
        key = (z.pair, z.component)
        if key in seen:
            continue
        seen.add(key)
        out.append(z)
    return out


def verify_safety(trajs: Sequence[Trajectory], zones: Sequence[ConflictZone],
                  dt: float, specs: Mapping[str, RobotSpec] | None = None,
                  boundary_tol: float = 1e-9) -> SafetyReport:
    """Sample all pairs at resolution dt and test each configuration against
    the collision polygons (and footprints when geometry is available).

    Configurations exactly on a polygon boundary do not count as violations
    (closed-complement convention).
    """
    by_id = {t.robot: t for t in trajs}
    t_end = min(t.t[-1] for t in trajs) if trajs else 0.0
    times = np.arange(0.0, t_end + dt * 0.5, dt)
    if times.size:
        times[-1] = min(times[-1], t_end)
    violations: list[SafetyViolation] = []
    min_clear = math.inf

    for z in _canonical_zones(zones):
        if z.polygon is None:
            continue
        ti, tj = by_id.get(z.robot_i), by_id.get(z.robot_j)
        if ti is None or tj is None:
            continue
        si, _ = ti.state(times)
        sj, _ = tj.state(times)
        pts = np.column_stack([si, sj])
        inside = z.polygon.strictly_contains(pts, tol=boundary_tol)
        for idx in np.nonzero(inside)[0]:
            violations.append(SafetyViolation(
                pair=(z.robot_i, z.robot_j), time=float(times[idx]),
                config=(float(si[idx]), float(sj[idx])), kind="polygon"))
        # clearance on the near-diagonal band only, to bound the scan
        for idx in range(len(times)):
            d = z.polygon.signed_distance(pts[idx])
            if d < min_clear:
                min_clear = d

    if specs is not None:
        geo = {rid: sp for rid, sp in specs.items()
               if isinstance(sp.geometry, PathGeometry)}
        for ra, rb in itertools.combinations(sorted(geo), 2):
            ta, tb = by_id.get(ra), by_id.get(rb)
            if ta is None or tb is None:
                continue
            sa, _ = ta.state(times)
            sb, _ = tb.state(times)
            ga, gb = geo[ra].geometry, geo[rb].geometry
            lim_a = ga.length + ga.robot_length
            lim_b = gb.length + gb.robot_length
            for idx in range(len(times)):
                pa, pb = sa[idx], sb[idx]
                if not (0.0 <= pa <= lim_a and 0.0 <= pb <= lim_b):
                    continue
                fa = footprint(ga, pa)
                fb = footprint(gb, pb)
                hit = any(rectangles_intersect(qa, qb, tol=-1e-9)
                          for qa in fa for qb in fb)
                if hit:
                    violations.append(SafetyViolation(
                        pair=(ra, rb), time=float(times[idx]),
                        config=(float(pa), float(pb)), kind="footprint"))
    return SafetyReport(violations=violations,
                        min_clearance=min_clear if min_clear != math.inf else math.inf)


def _crossing_time(traj: Trajectory, s_target: float) -> float:
    s, v, tau = traj.s, traj.v, traj.tau
    above = np.nonzero(s >= s_target - 1e-12)[0]
    if above.size == 0:
        raise TrajectoryError(
            f"robot {traj.robot} never reaches {s_target} (liveness)")
    k = int(above[0])
    if k == 0:
        return float(traj.t[0])
    k -= 1
    a = (v[k + 1] - v[k]) / tau
    c = s_target - s[k]
    if abs(a) < 1e-12:
        delta = c / v[k] if v[k] > 1e-12 else tau
    else:
        disc = v[k] * v[k] + 2.0 * a * c
        disc = max(disc, 0.0)
        r1 = (-v[k] + math.sqrt(disc)) / a
        r2 = (-v[k] - math.sqrt(disc)) / a
        candidates = [r for r in (r1, r2) if -1e-9 <= r <= tau + 1e-9]
        delta = min(candidates) if candidates else tau
    return float(traj.t[k] + min(max(delta, 0.0), tau))


def metrics(trajs: Sequence[Trajectory], robots: Sequence[RobotSpec],
            zones: Sequence[ConflictZone] = (), dt: float | None = None) -> Metrics:
    """Exit and sojourn times at sub-step precision; mean over robots."""
    by_id = {t.robot: t for t in trajs}
    t_out = {}
    sojourn = {}
    for r in robots:
        traj = by_id[r.id]
        t_exit = _crossing_time(traj, r.s_out)
        t_out[r.id] = t_exit
        sojourn[r.id] = t_exit - r.t_in
    mean = sum(sojourn.values()) / len(sojourn)
    clearance = None
    if zones:
        tau = trajs[0].tau
        report = verify_safety(trajs, zones, dt or tau / 20.0)
        clearance = report.min_clearance
    return Metrics(t_out=t_out, sojourn=sojourn, mean_sojourn=mean,
                   min_clearance=clearance)


@dataclass
class OracleResult:
    status: str  # optimal | infeasible
    objective: float | None
    assignment: dict[tuple[str, str, int], str] | None
    reports: dict[tuple[int, ...], str] = field(default_factory=dict)


def enumerate_priorities_oracle(robots: Sequence[RobotSpec],
                                zones: Sequence[ConflictZone],
                                disc: Discretization,
                                options: ModelOptions | None = None,
                                limits: SolveLimits | None = None,
                                threads: int = 1,
                                model: MilpModel | None = None) -> OracleResult:
    """Global optimum by brute force over all 2^p priority assignments.

    Ties are broken by the lexicographically smallest assignment vector so
    the reduction is deterministic regardless of evaluation order.
    """
    if model is None:
        model = build_model(robots, zones, disc, options or ModelOptions())
    p = len(model.groups)
    if p > 6:
        raise TrajectoryError(f"{p} conflict components exceed the oracle limit of 6")

    combos = list(itertools.product((0, 1), repeat=p))

    def run(bits):
        assignment = {g.key: (g.a if bit == 0 else g.b)
                      for g, bit in zip(model.groups, bits)}
        sub = fix_priorities(model, assignment)
        return bits, assignment, solve_milp(sub, limits)

    if threads > 1 and len(combos) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, combos))
    else:
        results = [run(bits) for bits in combos]

    best = None  # (objective, bits, assignment)
    reports = {}
    for bits, assignment, report in results:
        reports[bits] = report.status
        if report.status != "optimal":
            continue
        key = report.objective
        if best is None or key > best[0] + 1e-9 or \
                (abs(key - best[0]) <= 1e-9 and bits < best[1]):
            best = (key, bits, assignment)
    if best is None:
        return OracleResult(status="infeasible", objective=None,
                            assignment=None, reports=reports)
    return OracleResult(status="optimal", objective=best[0],
                        assignment=best[2], reports=reports)


def trajectories_to_csv(trajs: Sequence[Trajectory]) -> str:
    """Stable export: header `robot,t,s,v,a`, one row per knot."""
    buf = io.StringIO()
    buf.write("robot,t,s,v,a\n")
    for traj in trajs:
        acc = np.append(traj.accels, 0.0)
        for t, s, v, a in zip(traj.t, traj.s, traj.v, acc):
            buf.write(f"{traj.robot},{t:.9g},{s:.9g},{v:.9g},{a:.9g}\n")
    return buf.getvalue()


def parse_trajectories_csv(text: str) -> list[Trajectory]:
    rows: dict[str, list[tuple[float, float, float]]] = {}
    lines = text.strip().splitlines()
    if not lines or lines[0] != "robot,t,s,v,a":
        raise TrajectoryError("bad trajectory CSV header")
    for line in lines[1:]:
        rid, t, s, v, _a = line.split(",")
        rows.setdefault(rid, []).append((float(t), float(s), float(v)))
    trajs = []
    for rid, knots in rows.items():
        knots.sort()
        arr = np.array(knots)
        tau = arr[1, 0] - arr[0, 0]
        trajs.append(Trajectory(robot=rid, tau=tau, t=arr[:, 0], s=arr[:, 1],
                                v=arr[:, 2]))
    return trajs
