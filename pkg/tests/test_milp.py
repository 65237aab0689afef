import itertools
import math

import numpy as np
import pytest

from helpers import (
    abstract_robot,
    assemble_solution,
    crossing_zone,
    max_violation,
    uniform_knots,
)
from pathsync.milp import (
    GAP_TOL,
    LpSolution,
    SolveLimits,
    _compiled_rows,
    solve_lp,
    solve_milp,
    warm_start,
)
from pathsync.model import (
    Column,
    Discretization,
    LinearConstraint,
    MilpModel,
    ModelOptions,
    VariableIndex,
    build_model,
    fix_priorities,
)
from pathsync.mpsio import ExportError, export_model, read_mps, write_lp, write_mps, _row_names


def raw_model(bounds, binaries, rows, obj):
    """Assemble a bare MilpModel for generic solver tests."""
    columns = []
    col_of = {}
    for i, (lb, ub) in enumerate(bounds):
        kind = "mu" if i in binaries else "v"
        idx = VariableIndex(kind, robot=f"x{i}", k=0)
        columns.append(Column(idx, lb, ub, i in binaries))
        col_of[idx] = i
    constraints = [LinearConstraint(dict(co), sense, rhs, f"r{k}")
                   for k, (co, sense, rhs) in enumerate(rows)]
    return MilpModel(columns=columns, constraints=constraints,
                     objective=dict(obj), tau=1.0, K=1, col_of=col_of,
                     robots=[], groups=[], implications=[], meta={})


def single_robot_model(tie_break=False, K=10, tau=1.0, s_out=30.0, v_in=15.0):
    r = abstract_robot("a", s_out=s_out, v_in=v_in)
    disc = Discretization(tau, K)
    return r, build_model([r], [], disc,
                          ModelOptions(tie_break=tie_break))


def enumeration_optimum(model):
    bins = model.binary_columns()
    free = [c for c in bins if model.columns[c].lb < model.columns[c].ub]
    best = None
    for combo in itertools.product((0.0, 1.0), repeat=len(free)):
        sol = solve_lp(model, fixes=dict(zip(free, combo)))
        if sol.optimal and (best is None or sol.objective > best):
            best = sol.objective
    return best


# ---------------------------------------------------------------------------
# LP engine


def test_lp_toy_maximization():
    m = raw_model([(0, 1), (0, 1)], set(),
                  [({0: 1.0, 1: 1.0}, "<=", 1.0)], {0: 1.0, 1: 1.0})
    sol = solve_lp(m)
    assert sol.optimal
    assert sol.objective == pytest.approx(1.0)
    assert sol.basis is not None and len(sol.basis) == 2


def test_lp_infeasible_and_unbounded_status():
    m = raw_model([(0, 1)], set(), [({0: 1.0}, ">=", 2.0)], {0: 1.0})
    assert solve_lp(m).status == "infeasible"


def test_lp_single_robot_fixed_binaries_hits_closed_form():
    r, model = single_robot_model(tie_break=False)
    disc = Discretization(1.0, 10)
    knots = {"a": uniform_knots(r, disc)}
    x = assemble_solution(model, knots, winners={})
    fixes = {c: float(round(x[c])) for c in model.binary_columns()}
    sol = solve_lp(model, fixes=fixes)
    assert sol.optimal
    s2 = model.column(VariableIndex("s", robot="a", k=2))
    assert sol.x[s2] == pytest.approx(30.0, abs=1e-6)
    assert sol.objective == pytest.approx(9.0, abs=1e-6)


def test_lp_relaxation_bounds_integer_optimum():
    robots = [abstract_robot("a", s_out=50.0),
              abstract_robot("b", s_out=50.0, t_in=1.0)]
    zones = crossing_zone("a", "b", 25, 35, 25, 35, (50.0, 50.0))
    model = build_model(robots, zones, Discretization(1.0, 12),
                        ModelOptions(tie_break=False))
    relax = solve_lp(model)
    report = solve_milp(model)
    assert report.status == "optimal"
    assert relax.objective >= report.objective - 1e-9


def test_lp_complementary_slackness():
    robots = [abstract_robot("a", s_out=40.0)]
    model = build_model(robots, [], Discretization(1.0, 8), ModelOptions())
    sol = solve_lp(model)
    rows = _compiled_rows(model)
    slack_ub = rows["b_ub"] - rows["A_ub"] @ sol.x
    resid = np.abs(sol.duals["ineqlin"] * slack_ub).max() if slack_ub.size else 0.0
    assert resid <= 1e-6
    lb = np.array([c.lb for c in model.columns])
    ub = np.array([c.ub for c in model.columns])
    resid_lo = np.abs(sol.duals["lower"] * (sol.x - lb))
    resid_hi = np.abs(sol.duals["upper"] * (ub - sol.x))
    assert max(resid_lo.max(), resid_hi.max()) <= 1e-6


# ---------------------------------------------------------------------------
# branch and bound


def test_single_robot_uniform_motion_objective():
    _, model = single_robot_model(tie_break=False)
    report = solve_milp(model)
    assert report.status == "optimal"
    # exits at step 2 -> sigma counts K - 2 + 1 = 9
    assert report.objective == pytest.approx(9.0, abs=1e-6)
    sg2 = model.column(VariableIndex("sigma", robot="a", k=2))
    assert report.incumbent.x[sg2] == pytest.approx(1.0, abs=1e-5)


def test_unavoidable_collision_is_infeasible():
    # both robots sit at the zone edge at t=0 and cannot stop outside it
    robots = [abstract_robot("a", s_out=40.0, v_in=15.0),
              abstract_robot("b", s_out=40.0, v_in=15.0)]
    zones = crossing_zone("a", "b", 0.0, 12.0, 0.0, 12.0, (40.0, 40.0))
    model = build_model(robots, zones, Discretization(1.0, 10), ModelOptions())
    report = solve_milp(model)
    assert report.status == "infeasible"


def test_bnb_matches_exhaustive_enumeration_on_random_milps():
    rng = np.random.default_rng(42)
    for _ in range(10):
        n_bin, n_cont, m = 4, 3, 5
        bounds = [(0.0, 1.0)] * n_bin + [(0.0, 10.0)] * n_cont
        x_feas = np.concatenate([rng.integers(0, 2, n_bin),
                                 rng.uniform(0, 10, n_cont)])
        rows = []
        for _ in range(m):
            coeffs = {i: float(rng.uniform(-3, 3)) for i in range(n_bin + n_cont)
                      if rng.random() < 0.8}
            if not coeffs:
                coeffs = {0: 1.0}
            rhs = sum(a * x_feas[i] for i, a in coeffs.items()) + rng.uniform(0.5, 3)
            rows.append((coeffs, "<=", float(rhs)))
        obj = {i: float(rng.uniform(-2, 2)) for i in range(n_bin + n_cont)}
        model = raw_model(bounds, set(range(n_bin)), rows, obj)
        brute = enumeration_optimum(model)
        report = solve_milp(model)
        assert report.status == "optimal"
        assert report.objective == pytest.approx(brute, abs=1e-6)


def test_bnb_matches_enumeration_on_robot_model():
    robots = [abstract_robot("a", s_out=50.0, v_in=12.0),
              abstract_robot("b", s_out=55.0, t_in=1.0, v_in=14.0)]
    zones = crossing_zone("a", "b", 38, 46, 40, 48, (50.0, 55.0))
    model = build_model(robots, zones, Discretization(1.0, 12), ModelOptions())
    report = solve_milp(model)
    # enumerate over the two priority choices and compare
    best = -math.inf
    for winner in ("a", "b"):
        sub = fix_priorities(model, {("a", "b", 0): winner})
        r = solve_milp(sub)
        if r.status == "optimal":
            best = max(best, r.objective)
    assert report.status == "optimal"
    assert report.objective == pytest.approx(best, abs=1e-6)


def test_incumbent_satisfies_all_rows_and_integrality():
    robots = [abstract_robot("a", s_out=50.0, v_in=12.0),
              abstract_robot("b", s_out=50.0, t_in=2.0, v_in=14.0)]
    zones = crossing_zone("a", "b", 35, 45, 35, 45, (50.0, 50.0))
    model = build_model(robots, zones, Discretization(1.0, 12), ModelOptions())
    report = solve_milp(model)
    assert report.status == "optimal"
    x = report.incumbent.x
    worst, tag = max_violation(model, x)
    assert worst <= 1e-6, tag
    for c in model.binary_columns():
        assert abs(x[c] - round(x[c])) <= 1e-5


def test_solver_determinism_single_thread():
    robots = [abstract_robot("a", s_out=50.0, v_in=12.0),
              abstract_robot("b", s_out=50.0, t_in=1.0, v_in=13.0)]
    zones = crossing_zone("a", "b", 35, 45, 35, 45, (50.0, 50.0))
    model = build_model(robots, zones, Discretization(1.0, 12), ModelOptions())
    r1 = solve_milp(model)
    r2 = solve_milp(model)
    assert r1.nodes == r2.nodes
    assert r1.objective == r2.objective
    assert np.array_equal(r1.incumbent.x, r2.incumbent.x)


def test_timeout_statuses():
    robots = [abstract_robot("a", s_out=50.0, v_in=12.0),
              abstract_robot("b", s_out=50.0, t_in=1.0, v_in=13.0)]
    zones = crossing_zone("a", "b", 35, 45, 35, 45, (50.0, 50.0))
    model = build_model(robots, zones, Discretization(1.0, 12), ModelOptions())
    report = solve_milp(model, SolveLimits(node_limit=0))
    assert report.status == "timeout-no-incumbent"


def test_cuts_are_valid_and_tighten_the_relaxation():
    """Monotonicity cuts must not cut off the optimum.  When the uncut model
    proves optimality in budget we assert equality; otherwise we assert the
    sandwich incumbent <= cut optimum <= uncut bound.  Any uncut incumbent
    with monotone indicators must satisfy every cut row."""
    rng = np.random.default_rng(3)
    proven_equal = 0
    for seed in range(20):
        robots = [abstract_robot("a", s_out=45.0, v_in=float(rng.uniform(9, 14))),
                  abstract_robot("b", s_out=48.0, t_in=float(rng.uniform(0, 2)),
                                 v_in=float(rng.uniform(9, 14)))]
        lo_a = float(rng.uniform(32, 36))
        lo_b = float(rng.uniform(32, 36))
        zones = crossing_zone("a", "b", lo_a, lo_a + 8, lo_b, lo_b + 8,
                              (45.0, 48.0))
        disc = Discretization(1.0, 10)
        opts_cut = ModelOptions(tie_break=False)
        opts_raw = ModelOptions(tie_break=False, cuts=False, presolve=True)
        cut = build_model(robots, zones, disc, opts_cut)
        raw = build_model(robots, zones, disc, opts_raw)
        assert solve_lp(cut).objective <= solve_lp(raw).objective + 1e-9
        r_cut = solve_milp(cut)
        assert r_cut.status == "optimal"
        r_raw = solve_milp(raw, SolveLimits(node_limit=400, time_limit=10.0))
        if r_raw.status == "optimal":
            proven_equal += 1
            assert r_cut.objective == pytest.approx(r_raw.objective, abs=1e-6)
        else:
            assert r_raw.bound >= r_cut.objective - 1e-6
            if r_raw.incumbent is not None:
                assert r_raw.incumbent.objective <= r_cut.objective + 1e-6
        # feasibility transfer: the physical completion of an uncut solution
        # (post-exit knots continued at the exit speed, indicators re-derived
        # from positions) satisfies every cut-model row
        if r_raw.incumbent is not None:
            x = physical_completion(raw, r_raw.incumbent.x)
            cuts_only = build_model(robots, zones, disc,
                                    ModelOptions(tie_break=False, cuts=True,
                                                 presolve=False))
            worst, tag = max_violation(cuts_only, x)
            assert worst <= 1e-6, tag
    assert proven_equal >= 10  # the budget must prove most instances outright


def physical_completion(model, x):
    from pathsync.milp import _compiled_rows

    x = x.copy()
    tau, K = model.tau, model.K
    for r in model.robots:
        s_cols = [model.column(VariableIndex("s", robot=r.id, k=k))
                  for k in range(K + 1)]
        v_cols = [model.column(VariableIndex("v", robot=r.id, k=k))
                  for k in range(K + 1)]
        sg_cols = [model.column(VariableIndex("sigma", robot=r.id, k=k))
                   for k in range(K + 1)]
        exited = [k for k in range(K + 1) if x[sg_cols[k]] > 0.5]
        if not exited:
            continue
        k_out = exited[0]
        for m in range(k_out + 1, K + 1):
            x[v_cols[m]] = x[v_cols[k_out]]
            x[s_cols[m]] = x[s_cols[k_out]] + (m - k_out) * tau * x[v_cols[k_out]]
    for b, (scol, theta) in _compiled_rows(model)["threshold_info"].items():
        x[b] = 1.0 if x[scol] >= theta - 1e-9 else 0.0
    return x


def test_tie_break_prefers_speed_but_never_flips_exit_count():
    r, model = single_robot_model(tie_break=True)
    disc = Discretization(1.0, 10)
    # profile A: uniform 15 m/s, exits at k=2
    sA, vA = uniform_knots(r, disc)
    xA = assemble_solution(model, {"a": (sA, vA)}, winners={})
    # profile B: dips to 12 m/s once, exits at k=3 (trapezoid-consistent)
    vB = np.array([15.0, 12.0, 15.0] + [15.0] * 8)
    sB = np.concatenate([[0.0], np.cumsum(0.5 * 1.0 * (vB[:-1] + vB[1:]))])
    xB = assemble_solution(model, {"a": (sB, vB)}, winners={})
    objA = sum(a * xA[c] for c, a in model.objective.items())
    objB = sum(a * xB[c] for c, a in model.objective.items())
    assert objA > objB  # one extra exit step dominates any speed bonus
    report = solve_milp(model)
    sg2 = model.column(VariableIndex("sigma", robot="a", k=2))
    assert report.incumbent.x[sg2] == pytest.approx(1.0, abs=1e-5)


# ---------------------------------------------------------------------------
# warm starts


def test_warm_start_with_known_optimum_finishes_at_zero_gap():
    robots = [abstract_robot("a", s_out=50.0, v_in=12.0),
              abstract_robot("b", s_out=50.0, t_in=2.0, v_in=14.0)]
    zones = crossing_zone("a", "b", 35, 45, 35, 45, (50.0, 50.0))
    model = build_model(robots, zones, Discretization(1.0, 12), ModelOptions())
    base = solve_milp(model)
    hint = {model.columns[c].index: int(round(base.incumbent.x[c]))
            for c in model.binary_columns()}
    seeded = solve_milp(model, warm=hint)
    assert seeded.status == "optimal"
    assert seeded.objective == pytest.approx(base.objective, abs=1e-9)


def test_warm_start_rejects_malformed_hint():
    robots = [abstract_robot("a", s_out=50.0),
              abstract_robot("b", s_out=50.0, t_in=2.0)]
    zones = crossing_zone("a", "b", 35, 45, 35, 45, (50.0, 50.0))
    model = build_model(robots, zones, Discretization(1.0, 12), ModelOptions())
    hint = {model.columns[c].index: 1 for c in model.binary_columns()}
    with pytest.raises(ValueError):
        warm_start(model, hint)  # pi_ij + pi_ji = 2


def test_warm_start_infeasible_hint_is_ignored_with_warning():
    _, model = single_robot_model()
    hint = {model.columns[c].index: 0 for c in model.binary_columns()}
    # all-zero sigma contradicts liveness; expect a warning and None
    with pytest.warns(RuntimeWarning):
        assert warm_start(model, hint) is None


# ---------------------------------------------------------------------------
# export


def test_mps_round_trip_reproduces_matrix():
    _, model = single_robot_model()
    text = write_mps(model)
    parsed = read_mps(text)
    assert parsed.maximize
    names = [c.index.name() for c in model.columns]
    rows = _row_names(model)
    # bounds and integrality
    for c, col in enumerate(model.columns):
        lo, hi = parsed.bounds[names[c]]
        assert lo == pytest.approx(col.lb) and hi == pytest.approx(col.ub)
        assert (names[c] in parsed.integers) == col.is_binary
    # full coefficient matrix
    expect = {}
    for con, rname in zip(model.constraints, rows):
        assert parsed.rows[rname] == con.sense
        assert parsed.rhs.get(rname, 0.0) == pytest.approx(con.rhs)
        for cidx, a in con.coeffs.items():
            expect[(rname, names[cidx])] = a
    assert set(parsed.entries) == set(expect)
    for key, val in expect.items():
        assert parsed.entries[key] == pytest.approx(val)
    # objective
    for cidx, w in model.objective.items():
        assert parsed.objective[names[cidx]] == pytest.approx(w)


def test_export_determinism():
    _, m1 = single_robot_model()
    _, m2 = single_robot_model()
    assert export_model(m1, "mps") == export_model(m2, "mps")
    assert export_model(m1, "lp") == export_model(m2, "lp")


def test_export_rejects_empty_model():
    empty = raw_model([], set(), [], {})
    with pytest.raises(ExportError):
        export_model(empty, "mps")


def test_lp_text_sections():
    _, model = single_robot_model()
    text = write_lp(model)
    for section in ("Maximize", "Subject To", "Bounds", "Binaries", "End"):
        assert section in text
