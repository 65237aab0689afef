"""Shared fixtures: abstract zone constructors and hand-built solutions."""

import numpy as np

from pathsync.geometry import (
    AbstractPath,
    CollisionPolygon,
    RobotSpec,
    decompose,
)
from pathsync.model import VariableIndex, _EPS_KINDS


def abstract_robot(rid, s_out, t_in=0.0, v_in=15.0, v_out=15.0, v_max=15.0,
                   a_min=-3.0, a_max=4.0):
    return RobotSpec(id=rid, geometry=AbstractPath(s_out=s_out), s_out=s_out,
                     t_in=t_in, v_in=v_in, v_out=v_out, v_max=v_max,
                     a_min=a_min, a_max=a_max)


def zone_pair_from_polygon(poly_ij, a, b, domain, d_par=2.0, component=0):
    zij = decompose(poly_ij, d_par, domain, "i_over_j", robot_i=a, robot_j=b,
                    component=component)
    zji = decompose(poly_ij, d_par, domain, "j_over_i", robot_i=a, robot_j=b,
                    component=component)
    return [zij, zji]


def crossing_zone(a, b, ai, bi, aj, bj, domain, d_par=2.0, component=0):
    """Rectangular (pure crossing) zone: robot a occupies [ai, bi], robot b
    occupies [aj, bj]."""
    poly = CollisionPolygon([(ai, aj), (bi, aj), (bi, bj), (ai, bj)])
    return zone_pair_from_polygon(poly, a, b, domain, d_par, component)


def band_zone(a, b, offset, half, domain, d_par=2.0, component=0):
    """Following band |s_a - s_b - offset| <= half over the whole domain."""
    from pathsync.geometry import _clip_halfplane, _dedupe_collinear

    di, dj = domain
    poly = [(0.0, 0.0), (di, 0.0), (di, dj), (0.0, dj)]
    poly = _clip_halfplane(poly, 1.0, -1.0, offset + half)
    poly = _clip_halfplane(poly, -1.0, 1.0, -(offset - half))
    return zone_pair_from_polygon(
        CollisionPolygon(_dedupe_collinear(poly)), a, b, domain, d_par, component)


def merge_zone(a, b, offset, half, merge_at_j, domain, d_par=2.0, component=0):
    """Merging zone: band cut below by robot b's merge point."""
    from pathsync.geometry import _clip_halfplane, _dedupe_collinear

    di, dj = domain
    poly = [(0.0, 0.0), (di, 0.0), (di, dj), (0.0, dj)]
    poly = _clip_halfplane(poly, 1.0, -1.0, offset + half)
    poly = _clip_halfplane(poly, -1.0, 1.0, -(offset - half))
    poly = _clip_halfplane(poly, 0.0, -1.0, -merge_at_j)
    return zone_pair_from_polygon(
        CollisionPolygon(_dedupe_collinear(poly)), a, b, domain, d_par, component)


def uniform_knots(spec, disc):
    """Constant-speed knot arrays for a robot that never accelerates."""
    t = np.arange(disc.K + 1) * disc.tau
    s = spec.v_in * (t - spec.t_in)
    v = np.full(disc.K + 1, spec.v_in)
    return s, v


def assemble_solution(model, knots, winners):
    """Build a full solution vector from per-robot (s, v) knot arrays and a
    {(a, b, component): winner} priority assignment.  Indicators are set to
    1 exactly when the position reached their threshold."""
    x = np.zeros(model.n_cols)
    for r in model.robots:
        s, v = knots[r.id]
        for k in range(model.K + 1):
            x[model.column(VariableIndex("s", robot=r.id, k=k))] = s[k]
            x[model.column(VariableIndex("v", robot=r.id, k=k))] = v[k]
            x[model.column(VariableIndex("mu", robot=r.id, k=k))] = float(s[k] >= 0.0)
            x[model.column(VariableIndex("sigma", robot=r.id, k=k))] = float(
                s[k] >= r.s_out)
    for g in model.groups:
        winner = winners[g.key]
        loser = g.b if winner == g.a else g.a
        x[model.column(VariableIndex("pi", pair=(winner, loser),
                                     component=g.component))] = 1.0
        x[model.column(VariableIndex("pi", pair=(loser, winner),
                                     component=g.component))] = 0.0
        for kind in _EPS_KINDS:
            for side in ("i", "j"):
                rid = g.a if side == "i" else g.b
                s, _ = knots[rid]
                theta = g.eps_threshold(kind, side)
                for k in range(model.K + 1):
                    x[model.column(VariableIndex(
                        kind, pair=(g.a, g.b), component=g.component,
                        side=side, k=k))] = float(s[k] >= theta)
    return x


def max_violation(model, x):
    """Largest constraint violation of a candidate solution."""
    worst = 0.0
    worst_tag = None
    for row in model.constraints:
        val = sum(a * x[c] for c, a in row.coeffs.items())
        if row.sense == "<=":
            viol = val - row.rhs
        elif row.sense == ">=":
            viol = row.rhs - val
        else:
            viol = abs(val - row.rhs)
        if viol > worst:
            worst, worst_tag = viol, row.tag
    return worst, worst_tag


def bound_violation(model, x):
    worst = 0.0
    for c, col in enumerate(model.columns):
        worst = max(worst, col.lb - x[c], x[c] - col.ub)
    return worst
