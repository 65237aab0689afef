"""Branch-and-bound MILP solver on top of an LP relaxation engine.

The LP relaxations are solved with HiGHS through scipy; this module owns the
search: node selection (best bound with depth-first plunging until a first
incumbent exists), branching order (priorities before zone indicators before
entry/exit indicators, most-fractional within a class) and incumbent/bound
bookkeeping.  A strict single-threaded mode is the default and is
deterministic; with `threads > 1` node relaxations are evaluated in parallel
batches and only node counts may differ.
"""

from __future__ import annotations

import heapq
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .model import MilpModel, VariableIndex

__all__ = [
    "SolverError",
    "LpSolution",
    "BnbNode",
    "SolveLimits",
    "SolveReport",
    "solve_lp",
    "solve_milp",
    "warm_start",
    "FEASIBILITY_TOL",
    "INTEGRALITY_TOL",
    "GAP_TOL",
]

FEASIBILITY_TOL = 1e-6
INTEGRALITY_TOL = 1e-5
# Sub-gap termination keeps independently computed optima comparable at 1e-6.
GAP_TOL = 1e-7


class SolverError(RuntimeError):
    """Numerical failure inside the LP engine."""


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    x: np.ndarray | None
    objective: float | None
    duals: dict | None = None
    basis: str | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


@dataclass(order=True)
class BnbNode:
    sort_key: tuple = field(compare=True)
    parent_bound: float = field(compare=False, default=math.inf)
    depth: int = field(compare=False, default=0)
    fixes: dict = field(compare=False, default_factory=dict)


@dataclass
class SolveLimits:
    time_limit: float | None = None
    node_limit: int | None = None
    gap: float = GAP_TOL


@dataclass
class SolveReport:
    status: str  # optimal | infeasible | timeout-with-incumbent | timeout-no-incumbent
    incumbent: LpSolution | None
    bound: float
    nodes: int
    wall_time: float

    @property
    def objective(self) -> float | None:
        return None if self.incumbent is None else self.incumbent.objective


def _compiled_rows(model: MilpModel):
    """Constraint matrices in linprog form, cached on the (shared) meta dict
    so bound-modified copies of the model reuse them."""
    cached = model.meta.get("_compiled_rows")
    if cached is not None and cached["n_cols"] == model.n_cols:
        return cached
    n = model.n_cols
    ub_r, ub_c, ub_v, ub_b = [], [], [], []
    eq_r, eq_c, eq_v, eq_b = [], [], [], []
    for con in model.constraints:
        if con.sense == "=":
            r = len(eq_b)
            eq_b.append(con.rhs)
            for c, a in con.coeffs.items():
                eq_r.append(r), eq_c.append(c), eq_v.append(a)
        else:
            sign = 1.0 if con.sense == "<=" else -1.0
            r = len(ub_b)
            ub_b.append(sign * con.rhs)
            for c, a in con.coeffs.items():
                ub_r.append(r), ub_c.append(c), ub_v.append(sign * a)
    a_ub = sparse.csr_matrix((ub_v, (ub_r, ub_c)), shape=(len(ub_b), n))
    a_eq = sparse.csr_matrix((eq_v, (eq_r, eq_c)), shape=(len(eq_b), n))
    c = np.zeros(n)
    for col, w in model.objective.items():
        c[col] = w
    compiled = {
        "n_cols": n,
        "A_ub": a_ub, "b_ub": np.asarray(ub_b, dtype=float),
        "A_eq": a_eq, "b_eq": np.asarray(eq_b, dtype=float),
        "c": c,
        "binaries": np.array(model.binary_columns(), dtype=int),
        "kind_rank": _branch_ranks(model),
        "threshold_info": _threshold_info(model),
    }
    model.meta["_compiled_rows"] = compiled
    return compiled


def _branch_ranks(model: MilpModel) -> tuple[np.ndarray, np.ndarray]:
    """pi branches before eps branches before mu/sigma; within a class the
    earliest time step first (indicator patterns are monotone step functions,
    so deciding switch times left to right keeps dives consistent)."""
    rank = np.full(model.n_cols, 9, dtype=int)
    step = np.zeros(model.n_cols, dtype=int)
    for cidx, col in enumerate(model.columns):
        kind = col.index.kind
        if kind == "pi":
            rank[cidx] = 0
        elif kind.startswith("eps"):
            rank[cidx] = 1
        elif kind in ("mu", "sigma"):
            rank[cidx] = 2
        if col.index.k is not None:
            step[cidx] = col.index.k
    return rank, step


def _base_bounds(model: MilpModel) -> np.ndarray:
    return np.array([(c.lb, c.ub) for c in model.columns], dtype=float)


def _threshold_info(model: MilpModel) -> dict[int, tuple[int, float]]:
    """binary column -> (position column, threshold) from the (h) pairs."""
    info: dict[int, tuple[int, float]] = {}
    for rec in model.implications:
        if (rec.tag.startswith("h.") and rec.sense == "<=" and
                len(rec.literals) == 1 and len(rec.coeffs) == 1):
            bcol, active = rec.literals[0]
            ((scol, coef),) = rec.coeffs.items()
            if active == 0 and coef == 1.0:
                info[bcol] = (scol, rec.rhs)
    return info


def _pi_rounding(model: MilpModel, x: np.ndarray,
                 bounds: np.ndarray) -> dict[int, float]:
    fixes: dict[int, float] = {}
    for g in model.groups:
        w = model.column(VariableIndex("pi", pair=(g.a, g.b), component=g.component))
        l = model.column(VariableIndex("pi", pair=(g.b, g.a), component=g.component))
        if bounds[w][0] >= bounds[w][1] or bounds[l][0] >= bounds[l][1]:
            continue
        first = 1.0 if x[w] >= x[l] else 0.0
        fixes[w] = min(max(first, bounds[w][0]), bounds[w][1])
        fixes[l] = min(max(1.0 - fixes[w], bounds[l][0]), bounds[l][1])
    return fixes


def _indicator_rounding(rows: dict, x: np.ndarray,
                        bounds: np.ndarray) -> dict[int, float]:
    info = rows["threshold_info"]
    fixes: dict[int, float] = {}
    for b in rows["binaries"]:
        lo, hi = bounds[b]
        if lo >= hi:
            continue
        if b in info:
            scol, theta = info[b]
            val = 1.0 if x[scol] >= theta - 1e-12 else 0.0
        else:
            val = float(np.rint(x[b]))
        fixes[int(b)] = min(max(val, lo), hi)
    return fixes


def _threshold_rounding(model: MilpModel, rows: dict, x: np.ndarray,
                        bounds: np.ndarray) -> LpSolution | None:
    """Primal heuristic.  Stage one pins the fractional priorities and
    re-solves so the positions reflect that ordering; stage two sets every
    indicator to its own threshold test on those positions and solves the
    resulting pure LP."""
    pi_fixes = _pi_rounding(model, x, bounds)
    if pi_fixes:
        staged = solve_lp(model, fixes=pi_fixes, bounds=bounds)
        if not staged.optimal:
            return None
        x = staged.x
    fixes = _indicator_rounding(rows, x, bounds)
    fixes.update(pi_fixes)
    if not fixes:
        return None
    sol = solve_lp(model, fixes=fixes, bounds=bounds)
    if sol.optimal and _fractional_binaries(sol.x, rows["binaries"]).size == 0:
        return sol
    return None


def _column_basis(x: np.ndarray, bounds: np.ndarray) -> str:
    codes = []
    for v, (lo, hi) in zip(x, bounds):
        if abs(v - lo) <= 1e-9:
            codes.append("L")
        elif abs(v - hi) <= 1e-9:
            codes.append("U")
        else:
            codes.append("B")
    return "".join(codes)


def solve_lp(model: MilpModel, fixes: Mapping[int, float] | None = None,
             bounds: np.ndarray | None = None) -> LpSolution:
    """Solve the LP relaxation (binaries relaxed to their interval bounds).

    `fixes` pins individual columns; `bounds` overrides the whole bound
    array (used by the search).
    """
    rows = _compiled_rows(model)
    if bounds is None:
        bounds = _base_bounds(model)
    else:
        bounds = bounds.copy()
    if fixes:
        for c, v in fixes.items():
            bounds[c] = (v, v)
    res = linprog(
        -rows["c"],
        A_ub=rows["A_ub"] if rows["b_ub"].size else None,
        b_ub=rows["b_ub"] if rows["b_ub"].size else None,
        A_eq=rows["A_eq"] if rows["b_eq"].size else None,
        b_eq=rows["b_eq"] if rows["b_eq"].size else None,
        bounds=bounds, method="highs",
    )
    if res.status == 0:
        duals = {
            "ineqlin": np.asarray(res.ineqlin.marginals),
            "eqlin": np.asarray(res.eqlin.marginals),
            "lower": np.asarray(res.lower.marginals),
            "upper": np.asarray(res.upper.marginals),
        }
        x = np.asarray(res.x)
        return LpSolution("optimal", x, -float(res.fun), duals,
                          _column_basis(x, bounds))
    if res.status == 2:
        return LpSolution("infeasible", None, None)
    if res.status == 3:
        return LpSolution("unbounded", None, None)
    raise SolverError(f"LP engine failed: status={res.status} {res.message}")


def _fractional_binaries(x: np.ndarray, binaries: np.ndarray,
                         tol: float = INTEGRALITY_TOL) -> np.ndarray:
    vals = x[binaries]
    frac = np.abs(vals - np.rint(vals))
    return binaries[frac > tol]


def _pick_branch_column(x: np.ndarray, candidates: np.ndarray,
                        rank: np.ndarray, step: np.ndarray) -> int:
    best = None
    best_key = None
    for c in candidates:
        key = (rank[c], step[c], abs(x[c] - 0.5), c)
        if best_key is None or key < best_key:
            best, best_key = c, key
    return int(best)


def _dive(model: MilpModel, rows: dict, bounds: np.ndarray,
          start: LpSolution, deadline: float | None,
          seed_fixes: Mapping[int, float] | None = None) -> LpSolution | None:
    """Greedy diving heuristic: repeatedly fix the earliest fractional
    indicator to the value its threshold suggests, flipping once when that
    direction is LP-infeasible.  No backtracking beyond the flip; returns an
    integral solution or None."""
    rank, step = rows["kind_rank"]
    binaries = rows["binaries"]
    fixes: dict[int, float] = dict(seed_fixes or {})
    sol = start
    for _ in range(2 * len(binaries) + 10):
        if deadline is not None and time.perf_counter() > deadline:
            return None
        fractional = _fractional_binaries(sol.x, binaries)
        if fractional.size == 0:
            return sol
        col = _pick_branch_column(sol.x, fractional, rank, step)
        info = rows["threshold_info"].get(col)
        if info is not None:
            near = 1.0 if sol.x[info[0]] >= info[1] - 1e-12 else 0.0
        else:
            near = float(np.rint(sol.x[col]))
        trial = solve_lp(model, fixes={**fixes, col: near}, bounds=bounds)
        if not trial.optimal:
            near = 1.0 - near
            trial = solve_lp(model, fixes={**fixes, col: near}, bounds=bounds)
            if not trial.optimal:
                return None
        fixes[col] = near
        sol = trial
    return None


def validate_hint(model: MilpModel, hint: Mapping[VariableIndex, int]) -> dict[int, float]:
    """Check a full binary assignment for shape errors (raises ValueError)."""
    fixes: dict[int, float] = {}
    for cidx in model.binary_columns():
        idx = model.columns[cidx].index
        if idx not in hint:
            raise ValueError(f"hint is missing binary {idx.name()}")
        val = int(hint[idx])
        if val not in (0, 1):
            raise ValueError(f"hint value for {idx.name()} must be 0 or 1")
        fixes[cidx] = float(val)
    for g in model.groups:
        ab = hint[VariableIndex("pi", pair=(g.a, g.b), component=g.component)]
        ba = hint[VariableIndex("pi", pair=(g.b, g.a), component=g.component)]
        if int(ab) + int(ba) != 1:
            raise ValueError(
                f"hint violates pi_ij + pi_ji = 1 for component ({g.a},{g.b},{g.component})")
    return fixes


def warm_start(model: MilpModel,
               hint: Mapping[VariableIndex, int]) -> LpSolution | None:
    """Turn a full binary assignment into an incumbent seed.

    Malformed hints raise; hints that are merely infeasible are ignored with
    a warning and None is returned.
    """
    fixes = validate_hint(model, hint)
    sol = solve_lp(model, fixes=fixes)
    if not sol.optimal:
        warnings.warn("warm-start hint is infeasible; ignored", RuntimeWarning)
        return None
    return sol


def solve_milp(model: MilpModel, limits: SolveLimits | None = None,
               fixes: Mapping[int, float] | None = None,
               warm: Mapping[VariableIndex, int] | None = None,
               threads: int = 1) -> SolveReport:
    """Best-first branch-and-bound with plunging; proves optimality to the
    relative gap in `limits.gap`."""
    limits = limits or SolveLimits()
    rows = _compiled_rows(model)
    binaries = rows["binaries"]
    rank, step = rows["kind_rank"]
    base = _base_bounds(model)
    if fixes:
        for c, v in fixes.items():
            base[c] = (v, v)

    t0 = time.perf_counter()
    incumbent: LpSolution | None = None

    def gap_abs() -> float:
        if incumbent is None:
            return 0.0
        return limits.gap * max(1.0, abs(incumbent.objective))

    if warm is not None:
        seed = warm_start(model, warm)
        if seed is not None:
            incumbent = seed

    heap: list[BnbNode] = []
    stack: list[BnbNode] = []
    seq = 0
    nodes = 0
    root = BnbNode(sort_key=(-math.inf, 0), parent_bound=math.inf, depth=0,
                   fixes={})
    stack.append(root)
    best_bound_seen = -math.inf
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    def node_bounds(node: BnbNode) -> np.ndarray:
        nb = base.copy()
        for c, v in node.fixes.items():
            nb[c] = (v, v)
        return nb

    def out_of_budget() -> str | None:
        if limits.time_limit is not None and time.perf_counter() - t0 > limits.time_limit:
            return "time"
        if limits.node_limit is not None and nodes >= limits.node_limit:
            return "node"
        return None

    def finish(status: str) -> SolveReport:
        if pool is not None:
            pool.shutdown(wait=False)
        open_bounds = [n.parent_bound for n in heap] + [n.parent_bound for n in stack]
        if status == "optimal":
            bound = incumbent.objective
        elif incumbent is not None:
            bound = max([incumbent.objective] + open_bounds)
        else:
            bound = max(open_bounds, default=best_bound_seen)
        return SolveReport(status=status, incumbent=incumbent, bound=bound,
                           nodes=nodes, wall_time=time.perf_counter() - t0)

    def accept(sol: LpSolution) -> None:
        nonlocal incumbent
        if incumbent is None or sol.objective > incumbent.objective:
            incumbent = sol

    def process(node: BnbNode, sol: LpSolution, nb: np.ndarray) -> None:
        nonlocal incumbent, seq, best_bound_seen
        if not sol.optimal:
            return
        best_bound_seen = max(best_bound_seen, sol.objective)
        if incumbent is not None and sol.objective <= incumbent.objective + gap_abs():
            return
        fractional = _fractional_binaries(sol.x, binaries)
        if fractional.size == 0:
            accept(sol)
            return
        # primal heuristics: cheap incumbents enable pruning
        if node.depth == 0 or (incumbent is None and nodes % 25 == 0):
            heur = _threshold_rounding(model, rows, sol.x, nb)
            if heur is None and (node.depth == 0 or nodes % 100 == 0):
                deadline = (t0 + limits.time_limit
                            if limits.time_limit is not None else None)
                heur = _dive(model, rows, nb, sol, deadline, node.fixes)
            if heur is not None:
                accept(heur)
                if sol.objective <= incumbent.objective + gap_abs():
                    return
        col = _pick_branch_column(sol.x, fractional, rank, step)
        info = rows["threshold_info"].get(col)
        if info is not None:  # dive in the direction the positions suggest
            near = 1.0 if sol.x[info[0]] >= info[1] - 1e-12 else 0.0
        else:
            near = float(np.rint(sol.x[col]))
        # preferred child continues the plunge (stack); sibling to the heap
        for val, target in ((1.0 - near, heap), (near, stack)):
            fixes_child = dict(node.fixes)
            fixes_child[col] = val
            node_child = BnbNode(sort_key=(-sol.objective, seq),
                                 parent_bound=sol.objective,
                                 depth=node.depth + 1, fixes=fixes_child)
            seq += 1
            if target is stack:
                stack.append(node_child)
            else:
                heapq.heappush(heap, node_child)

    while heap or stack:
        budget = out_of_budget()
        if budget is not None:
            return finish("timeout-with-incumbent" if incumbent else
                          "timeout-no-incumbent")
        batch: list[BnbNode] = []
        take = 1 if (stack or pool is None) else max(1, min(threads, len(heap)))
        for _ in range(take):
            if stack:
                batch.append(stack.pop())
            elif heap:
                batch.append(heapq.heappop(heap))
        batch = [n for n in batch
                 if incumbent is None or n.parent_bound > incumbent.objective + gap_abs()]
        if not batch:
            continue
        nodes += len(batch)
        all_bounds = [node_bounds(n) for n in batch]
        if pool is not None and len(batch) > 1:
            sols = list(pool.map(lambda nb: solve_lp(model, bounds=nb), all_bounds))
        else:
            sols = [solve_lp(model, bounds=nb) for nb in all_bounds]
        for node, sol, nb in zip(batch, sols, all_bounds):
            process(node, sol, nb)
        if incumbent is not None and not stack:
            while heap and heap[0].parent_bound <= incumbent.objective + gap_abs():
                heapq.heappop(heap)

    if incumbent is None:
        return finish("infeasible")
    return finish("optimal")
