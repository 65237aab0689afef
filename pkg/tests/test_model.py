import math

import numpy as np
import pytest

from helpers import (
    abstract_robot,
    assemble_solution,
    band_zone,
    bound_violation,
    crossing_zone,
    max_violation,
    uniform_knots,
)
from pathsync.model import (
    Discretization,
    MilpModel,
    ModelError,
    ModelOptions,
    VariableIndex,
    build_model,
    constraint_count_formula,
    fix_priorities,
    fix_receding_horizon,
    make_discretization,
    reachability_envelope,
    set_objective,
)

RAW = ModelOptions(tie_break=False, cuts=False, presolve=False)


def two_robot_crossing(tau=1.0, K=10, t_in_b=4.0):
    a = abstract_robot("a", s_out=50.0)
    b = abstract_robot("b", s_out=50.0, t_in=t_in_b)
    zones = crossing_zone("a", "b", 20.0, 30.0, 20.0, 30.0, (50.0, 50.0))
    return [a, b], zones, Discretization(tau, K)


# ---------------------------------------------------------------------------
# columns


def test_column_counts_two_robots_one_zone():
    robots, zones, disc = two_robot_crossing()
    m = build_model(robots, zones, disc, RAW)
    kinds = {}
    for col in m.columns:
        kinds[col.index.kind] = kinds.get(col.index.kind, 0) + 1
    assert kinds["s"] + kinds["v"] == 44
    assert kinds["mu"] + kinds["sigma"] == 44
    assert sum(kinds[k] for k in ("eps_par_in", "eps_par_out",
                                  "eps_perp_in", "eps_perp_out")) == 88
    assert kinds["pi"] == 2
    binaries = sum(1 for c in m.columns if c.is_binary)
    assert binaries == 44 + 88 + 2


def test_single_robot_no_zones_has_no_pair_columns():
    r = abstract_robot("solo", s_out=30.0)
    m = build_model([r], [], Discretization(1.0, 10), RAW)
    assert all(c.index.kind in ("s", "v", "mu", "sigma") for c in m.columns)


def test_three_robots_three_zones_give_six_pi():
    robots = [abstract_robot(rid, s_out=60.0) for rid in "123"]
    zones = []
    zones += crossing_zone("1", "2", 20, 30, 20, 30, (60.0, 60.0))
    zones += crossing_zone("2", "3", 25, 35, 25, 35, (60.0, 60.0))
    zones += crossing_zone("1", "3", 30, 40, 30, 40, (60.0, 60.0))
    m = build_model(robots, zones, Discretization(1.0, 10), RAW)
    assert sum(1 for c in m.columns if c.index.kind == "pi") == 6


def test_build_rejects_duplicate_ids_and_unknown_zone_robots():
    r = abstract_robot("a", s_out=30.0)
    with pytest.raises(ModelError):
        build_model([r, r], [], Discretization(1.0, 5), RAW)
    zones = crossing_zone("a", "ghost", 5, 10, 5, 10, (30.0, 30.0))
    with pytest.raises(ModelError):
        build_model([r], zones, Discretization(1.0, 5), RAW)
    with pytest.raises(ModelError):
        Discretization(-0.5, 5)


# ---------------------------------------------------------------------------
# big-M rows


def test_mu_row_uses_tight_upper_bound_m():
    # s bounds [-30, 480]: v_in=15, t_in=2, s_out=30, K=30, tau=1
    r = abstract_robot("a", s_out=30.0, t_in=2.0, v_in=15.0)
    m = build_model([r], [], Discretization(1.0, 30), RAW)
    k = 5
    mu = m.column(VariableIndex("mu", robot="a", k=k))
    s = m.column(VariableIndex("s", robot="a", k=k))
    row = next(c for c in m.constraints if c.tag == f"h.mu[a,{k}].le")
    assert row.coeffs[s] == 1.0
    assert row.coeffs[mu] == pytest.approx(-480.0)
    assert row.rhs == 0.0
    row = next(c for c in m.constraints if c.tag == f"h.sg[a,{k}].ge")
    # sigma=1 => s >= 30 with M = 30 - (-30) = 60
    assert row.coeffs[m.column(VariableIndex("sigma", robot="a", k=k))] == \
        pytest.approx(-60.0)
    assert row.rhs == pytest.approx(30.0 - 60.0)


def test_pi_exclusive_row():
    robots, zones, disc = two_robot_crossing()
    m = build_model(robots, zones, disc, RAW)
    row = next(c for c in m.constraints if c.tag.startswith("h.pi"))
    assert row.sense == "=" and row.rhs == 1.0
    assert sorted(row.coeffs.values()) == [1.0, 1.0]


def test_b2_final_speed_uses_tight_speed_m():
    r = abstract_robot("a", s_out=30.0, v_in=15.0, v_out=15.0, v_max=15.0)
    m = build_model([r], [], Discretization(1.0, 10), RAW)
    sg = m.column(VariableIndex("sigma", robot="a", k=4))
    rows = [c for c in m.constraints if c.tag == "b2[a,3]"]
    assert len(rows) == 2
    ge = next(r_ for r_ in rows if r_.sense == ">=")
    # v >= 15 - 15 (1 - sigma): M = v_out - 0 = 15
    assert ge.coeffs[sg] == pytest.approx(-15.0)
    assert ge.rhs == pytest.approx(0.0)
    le = next(r_ for r_ in rows if r_.sense == "<=")
    # upper side is tight at M = v_max - v_out = 0
    assert le.coeffs.get(sg, 0.0) == pytest.approx(0.0, abs=1e-12) or \
        le.coeffs[sg] == pytest.approx(0.0)


def test_initial_position_row():
    r = abstract_robot("a", s_out=30.0, t_in=2.0, v_in=10.0)
    m = build_model([r], [], Discretization(1.0, 10), RAW)
    row = next(c for c in m.constraints if c.tag == "b3[a]")
    assert row.rhs == pytest.approx(-20.0)
    r0 = abstract_robot("b", s_out=30.0, t_in=0.0, v_in=10.0)
    m0 = build_model([r0], [], Discretization(1.0, 10), RAW)
    assert next(c for c in m0.constraints if c.tag == "b3[b]").rhs == 0.0


def test_safety_s1_row_shape():
    robots, zones, disc = two_robot_crossing()
    m = build_model(robots, zones, disc, RAW)
    row = next(c for c in m.constraints if c.tag.startswith("s1[a>b") and ",3]" in c.tag)
    g = m.groups[0]
    pi_ab = m.column(VariableIndex("pi", pair=("a", "b"), component=0))
    out_i = m.column(VariableIndex("eps_perp_out", pair=("a", "b"),
                                   component=0, side="i", k=3))
    in_j = m.column(VariableIndex("eps_perp_in", pair=("a", "b"),
                                  component=0, side="j", k=4))
    # eps_in(j,k+1) <= (1 - pi) + eps_out(i,k), M = 1
    assert row.coeffs[in_j] == pytest.approx(1.0)
    assert row.coeffs[pi_ab] == pytest.approx(1.0)
    assert row.coeffs[out_i] == pytest.approx(-1.0)
    assert row.rhs == pytest.approx(1.0)
    assert row.sense == "<="


def test_following_zone_emits_gap_rows():
    a = abstract_robot("a", s_out=50.0)
    b = abstract_robot("b", s_out=50.0, t_in=2.0)
    zones = band_zone("a", "b", 0.0, 5.0, (50.0, 50.0), d_par=2.0)
    m = build_model([a, b], zones, Discretization(1.0, 10), RAW)
    s2 = [c for c in m.constraints if c.tag.startswith("s2[a>b")]
    assert len(s2) == 10
    # substitution check: with gates active the row reads s_a - s_b >= 7
    row = s2[0]
    sa = m.column(VariableIndex("s", robot="a", k=1))
    sb = m.column(VariableIndex("s", robot="b", k=1))
    assert row.coeffs[sa] == pytest.approx(1.0)
    assert row.coeffs[sb] == pytest.approx(-1.0)


def test_activated_implications_reduce_to_exact_condition():
    """With every antecedent literal at its active value, each big-M row must
    collapse to exactly the implied inequality (tightness)."""
    robots, zones, disc = two_robot_crossing()
    for opts in (RAW, ModelOptions()):
        m = build_model(robots, zones, disc, opts)
        for rec in m.implications:
            lits = dict(rec.literals)
            for row_id in rec.rows:
                row = m.constraints[row_id]
                shift = sum(row.coeffs.get(c, 0.0) * v for c, v in lits.items())
                residual_rhs = row.rhs - shift
                assert residual_rhs == pytest.approx(rec.rhs, abs=1e-9), row.tag
                remaining = {c: a for c, a in row.coeffs.items() if c not in lits}
                expect = {c: a for c, a in rec.coeffs.items() if a != 0.0}
                assert remaining.keys() == expect.keys(), row.tag
                for c, a in expect.items():
                    assert remaining[c] == pytest.approx(a), row.tag


def test_deactivated_implications_hold_over_bounds():
    robots, zones, disc = two_robot_crossing()
    m = build_model(robots, zones, disc, ModelOptions())
    lb = np.array([c.lb for c in m.columns])
    ub = np.array([c.ub for c in m.columns])
    rng = np.random.default_rng(0)
    for rec in rng.choice(m.implications, size=min(200, len(m.implications)),
                          replace=False):
        for row_id in rec.rows:
            row = m.constraints[row_id]
            for col, active in rec.literals:
                # worst case over the box with this literal deactivated
                lo = hi = 0.0
                for c, a in row.coeffs.items():
                    l, u = lb[c], ub[c]
                    if c == col:
                        l = u = float(1 - active)
                    else:
                        for c2, v2 in rec.literals:
                            if c2 == c:
                                l = u = float(v2)
                    lo += a * (l if a > 0 else u)
                    hi += a * (u if a > 0 else l)
                if row.sense == "<=":
                    assert hi <= row.rhs + 1e-6, row.tag
                else:
                    assert lo >= row.rhs - 1e-6, row.tag


# ---------------------------------------------------------------------------
# feasarity of a hand-built trajectory


def test_hand_built_uniform_crossing_satisfies_all_rows():
    robots, zones, disc = two_robot_crossing(tau=1.0, K=10, t_in_b=4.0)
    for opts in (RAW, ModelOptions()):
        m = build_model(robots, zones, disc, opts)
        knots = {r.id: uniform_knots(r, disc) for r in m.robots}
        x = assemble_solution(m, knots, winners={("a", "b", 0): "a"})
        worst, tag = max_violation(m, x)
        assert worst <= 1e-9, tag
        assert bound_violation(m, x) <= 1e-9


def test_objective_counts_post_exit_steps():
    r = abstract_robot("a", s_out=30.0, v_in=15.0)
    disc = Discretization(1.0, 10)
    m = build_model([r], [], disc, RAW)
    set_objective(m, tie_break=False)
    knots = {"a": uniform_knots(r, disc)}
    x = assemble_solution(m, knots, winners={})
    # exits at k_out = 2 (s = 30): sigma = 1 for k = 2..10 -> 9 steps
    val = sum(a * x[c] for c, a in m.objective.items())
    assert val == pytest.approx(10 - 2 + 1)


def test_objective_all_exit_at_horizon():
    # both robots exit exactly at k = K => O = (1 + 1)/2
    a = abstract_robot("a", s_out=150.0, v_in=15.0)
    b = abstract_robot("b", s_out=150.0, v_in=15.0)
    disc = Discretization(1.0, 10)
    m = build_model([a, b], [], disc, RAW)
    set_objective(m, tie_break=False)
    knots = {r.id: uniform_knots(r, disc) for r in m.robots}
    x = assemble_solution(m, knots, winners={})
    val = sum(a_ * x[c] for c, a_ in m.objective.items())
    assert val == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# determinism, counts, fixing


def test_model_determinism():
    robots, zones, disc = two_robot_crossing()
    m1 = build_model(robots, zones, disc, ModelOptions())
    m2 = build_model(robots, zones, disc, ModelOptions())
    assert [c.index.name() for c in m1.columns] == [c.index.name() for c in m2.columns]
    assert [(c.lb, c.ub, c.is_binary) for c in m1.columns] == \
        [(c.lb, c.ub, c.is_binary) for c in m2.columns]
    assert len(m1.constraints) == len(m2.constraints)
    for r1, r2 in zip(m1.constraints, m2.constraints):
        assert r1.coeffs == r2.coeffs and r1.rhs == r2.rhs and r1.sense == r2.sense
    assert m1.objective == m2.objective
    assert m1.meta["hash"] == m2.meta["hash"]


def test_constraint_count_matches_formula():
    robots, zones, disc = two_robot_crossing()
    for opts in (RAW, ModelOptions(cuts=True, presolve=True, tie_break=True)):
        m = build_model(robots, zones, disc, opts)
        assert len(m.constraints) == constraint_count_formula(
            len(robots), disc.K, m.groups, opts)
    a = abstract_robot("a", s_out=50.0)
    b = abstract_robot("b", s_out=50.0, t_in=2.0)
    zones = band_zone("a", "b", 0.0, 5.0, (50.0, 50.0))
    m = build_model([a, b], zones, Discretization(1.0, 8), RAW)
    assert len(m.constraints) == constraint_count_formula(2, 8, m.groups, RAW)


def test_presolve_pins_unreachable_indicators():
    robots, zones, disc = two_robot_crossing()
    m = build_model(robots, zones, disc, ModelOptions())
    # robot b enters at t=4; sigma_b^0 cannot be 1
    col = m.columns[m.column(VariableIndex("sigma", robot="b", k=0))]
    assert col.ub == 0.0
    # robot a at full speed for 10 s must be past s=0 from k=1 on
    col = m.columns[m.column(VariableIndex("mu", robot="a", k=2))]
    assert col.lb == 1.0


def test_reachability_envelope_uniform_before_entry():
    r = abstract_robot("a", s_out=50.0, t_in=2.0, v_in=10.0, v_max=15.0)
    disc = Discretization(1.0, 6)
    s_lo, s_hi, v_hi = reachability_envelope(r, disc)
    assert s_lo[0] == s_hi[0] == -20.0
    assert s_lo[1] == s_hi[1] == -10.0
    assert s_hi[2] == pytest.approx(0.0)
    # after entry the envelopes split
    assert s_hi[4] > s_lo[4]
    assert v_hi[4] == pytest.approx(min(15.0, 10.0 + 2 * 4.0))


def test_fix_priorities_pins_pi_columns():
    robots, zones, disc = two_robot_crossing()
    m = build_model(robots, zones, disc, ModelOptions())
    fixed = fix_priorities(m, {("a", "b", 0): "b"})
    c = fixed.column(VariableIndex("pi", pair=("b", "a"), component=0))
    assert fixed.columns[c].lb == 1.0
    c = fixed.column(VariableIndex("pi", pair=("a", "b"), component=0))
    assert fixed.columns[c].ub == 0.0


def test_fix_receding_rejects_out_of_bounds_value():
    robots, zones, disc = two_robot_crossing()
    m = build_model(robots, zones, disc, ModelOptions())
    committed = {}
    for idx in m.col_of:
        owners = {idx.robot} if idx.robot else set(idx.pair)
        if owners == {"a"}:
            committed[idx] = 1e9  # nonsense value
    with pytest.raises(ModelError):
        fix_receding_horizon(m, committed, new_robots=["b"])


def test_make_discretization_covers_horizon():
    robots = [abstract_robot("a", s_out=30.0, t_in=3.5)]
    disc = make_discretization(robots, tau=0.5, horizon=30.0)
    assert disc.K == math.ceil(33.5 / 0.5)
