"""Command-line interface: solve/verify/export scenarios, receding-horizon
batching, random scenario generation and the experiment harness.

Exit codes (stable contract): 0 optimal, 1 usage or parse error,
2 infeasible, 3 timeout with incumbent, 4 timeout without incumbent.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import PathGeometry
from .milp import SolveLimits, SolveReport, solve_milp
from .model import (
    MilpModel,
    ModelOptions,
    build_model,
    fix_priorities,
    fix_receding_horizon,
)
from .mpsio import export_model
from .scenario import (
    ArrivalModel,
    ParseError,
    Scenario,
    dump_scenario,
    gen_scenario,
    load_scenario,
    random_geometric_scenario,
)
from .trajectory import (
    Metrics,
    PriorityGraph,
    Trajectory,
    TrajectoryError,
    extract,
    metrics as compute_metrics,
    parse_trajectories_csv,
    trajectories_to_csv,
    verify_safety,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_TIMEOUT_INCUMBENT = 3
EXIT_TIMEOUT_NO_INCUMBENT = 4

_STATUS_CODE = {
    "optimal": EXIT_OK,
    "infeasible": EXIT_INFEASIBLE,
    "timeout-with-incumbent": EXIT_TIMEOUT_INCUMBENT,
    "timeout-no-incumbent": EXIT_TIMEOUT_NO_INCUMBENT,
}


@dataclass
class SolveOutcome:
    report: SolveReport
    model: MilpModel
    zones: list
    trajectories: list[Trajectory] = field(default_factory=list)
    graph: PriorityGraph | None = None
    metrics: Metrics | None = None
    safety_ok: bool | None = None
    infeasibility_hint: str | None = None

    @property
    def exit_code(self) -> int:
        return _STATUS_CODE[self.report.status]


def parse_forced_priorities(text: str, robot_ids: set[str]) -> list[tuple[str, str]]:
    pairs = []
    for token in text.split(","):
        token = token.strip()
        if not token or ">" not in token:
            raise ParseError(f"bad priority token {token!r}; expected 'winner>loser'")
        winner, loser = (part.strip() for part in token.split(">", 1))
        for rid in (winner, loser):
            if rid not in robot_ids:
                raise ParseError(f"--force-priorities references unknown robot {rid!r}")
        if winner == loser:
            raise ParseError(f"--force-priorities pair {token!r} repeats a robot")
        pairs.append((winner, loser))
    return pairs


def solve_scenario(scn: Scenario, tau: float | None = None,
                   horizon: float | None = None,
                   force_priorities: list[tuple[str, str]] | None = None,
                   tie_break: bool = True, cuts: bool = True,
                   time_limit: float | None = None, threads: int = 1,
                   verify: bool = True) -> SolveOutcome:
    zones = scn.build_zones()
    disc = scn.discretization(tau, horizon)
    options = ModelOptions(tie_break=tie_break, cuts=cuts)
    model = build_model(scn.robots, zones, disc, options)
    if force_priorities:
        assignment = {}
        for winner, loser in force_priorities:
            hits = [g for g in model.groups if {g.a, g.b} == {winner, loser}]
            if not hits:
                raise ParseError(
                    f"--force-priorities: robots {winner},{loser} share no conflict zone")
            for g in hits:
                assignment[g.key] = winner
        model = fix_priorities(model, assignment)
    report = solve_milp(model, SolveLimits(time_limit=time_limit),
                        threads=threads)
    outcome = SolveOutcome(report=report, model=model, zones=zones)
    if report.status == "infeasible":
        outcome.infeasibility_hint = diagnose_infeasibility(scn, zones, disc, options)
        return outcome
    if report.incumbent is None:
        return outcome
    trajs, graph = extract(model, report)
    outcome.trajectories = trajs
    outcome.graph = graph
    outcome.metrics = compute_metrics(trajs, scn.robots, zones=zones,
                                      dt=disc.tau / 20.0)
    if verify:
        specs = scn.specs_by_id() if scn.mode == "geometric" else None
        safety = verify_safety(trajs, zones, dt=disc.tau / 20.0, specs=specs)
        outcome.safety_ok = safety.ok
        if not safety.ok:
            v = safety.violations[0]
            raise TrajectoryError(
                f"solver output failed verification: pair {v.pair} at t={v.time:.3f}")
    return outcome


def diagnose_infeasibility(scn: Scenario, zones, disc, options) -> str:
    """Distinguish 'K too small' from genuinely unsafe initial states."""
    bigger = type(disc)(tau=disc.tau, K=2 * disc.K)
    model = build_model(scn.robots, zones, bigger, options)
    report = solve_milp(model, SolveLimits(time_limit=30.0))
    if report.status == "optimal":
        return ("infeasible with K={}, feasible with K={}: the horizon is too "
                "short; increase --horizon or reduce --tau".format(disc.K, bigger.K))
    return ("infeasible even with a doubled horizon: the initial states do not "
            "admit a safe passage")


def receding_solve(scn: Scenario, window: float, tau: float | None = None,
                   horizon: float | None = None, tie_break: bool = True,
                   cuts: bool = True, time_limit: float | None = None,
                   threads: int = 1) -> tuple[SolveOutcome, list[dict]]:
    """Solve arrival batches sequentially, fixing earlier batches' motion."""
    if window <= 0:
        raise ParseError("batch window must be positive")
    zones_all = scn.build_zones()
    disc = scn.discretization(tau, horizon)
    options = ModelOptions(tie_break=tie_break, cuts=cuts)
    t0 = min(r.t_in for r in scn.robots)
    batches: dict[int, list] = {}
    for r in scn.robots:
        batches.setdefault(int((r.t_in - t0) // window), []).append(r)
    batch_log = []
    committed: dict = {}
    solved_ids: set[str] = set()
    outcome = None
    for b_idx in sorted(batches):
        subset_ids = solved_ids | {r.id for r in batches[b_idx]}
        robots = [r for r in scn.robots if r.id in subset_ids]
        zones = [z for z in zones_all
                 if z.robot_i in subset_ids and z.robot_j in subset_ids]
        model = build_model(robots, zones, disc, options)
        if solved_ids:
            model = fix_receding_horizon(model, committed,
                                         new_robots=subset_ids - solved_ids)
        report = solve_milp(model, SolveLimits(time_limit=time_limit),
                            threads=threads)
        batch_log.append({"batch": b_idx, "robots": sorted(subset_ids - solved_ids),
                          "status": report.status,
                          "objective": report.objective})
        if report.status != "optimal":
            raise ParseError(
                f"receding batch {b_idx} failed with status {report.status}")
        x = report.incumbent.x
        committed = {idx: float(x[c]) for idx, c in model.col_of.items()}
        solved_ids = subset_ids
        outcome = SolveOutcome(report=report, model=model, zones=zones)
    trajs, graph = extract(outcome.model, outcome.report)
    outcome.trajectories = trajs
    outcome.graph = graph
    outcome.metrics = compute_metrics(trajs, scn.robots, zones=zones_all,
                                      dt=disc.tau / 20.0)
    specs = scn.specs_by_id() if scn.mode == "geometric" else None
    safety = verify_safety(trajs, zones_all, dt=disc.tau / 20.0, specs=specs)
    outcome.safety_ok = safety.ok
    if not safety.ok:
        v = safety.violations[0]
        raise TrajectoryError(
            f"receding composite failed verification: pair {v.pair} at t={v.time:.3f}")
    return outcome, batch_log


# ---------------------------------------------------------------------------
# output artifacts


def _metrics_payload(outcome: SolveOutcome, scn: Scenario) -> dict:
    m = outcome.metrics
    return {
        "mean_sojourn": m.mean_sojourn,
        "min_clearance": m.min_clearance,
        "robots": {rid: {"t_in": next(r.t_in for r in scn.robots if r.id == rid),
                         "t_out": m.t_out[rid],
                         "sojourn": m.sojourn[rid]}
                   for rid in sorted(m.t_out)},
    }


def _report_payload(outcome: SolveOutcome, scn: Scenario, wall: float) -> dict:
    rep = outcome.report
    payload = {
        "status": rep.status,
        "objective": rep.objective,
        "bound": rep.bound,
        "nodes": rep.nodes,
        "wall_time": wall,
        "tau": outcome.model.tau,
        "K": outcome.model.K,
        "exit_code": outcome.exit_code,
    }
    if outcome.graph is not None:
        payload["priorities"] = sorted(
            f"{w}>{l}" for w, l in outcome.graph.edges)
        payload["priorities_acyclic"] = outcome.graph.is_acyclic()
    if outcome.infeasibility_hint:
        payload["infeasibility"] = outcome.infeasibility_hint
    return payload


def write_solution_files(out_dir: Path, outcome: SolveOutcome, scn: Scenario,
                         wall: float) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    if outcome.trajectories:
        (out_dir / "trajectories.csv").write_text(
            trajectories_to_csv(outcome.trajectories))
        (out_dir / "metrics.json").write_text(
            json.dumps(_metrics_payload(outcome, scn), indent=2) + "\n")
    (out_dir / "report.json").write_text(
        json.dumps(_report_payload(outcome, scn, wall), indent=2) + "\n")


def svg_line_chart(path: Path, xs: list[float], ys: list[float],
                   yerr: list[float] | None, title: str, xlabel: str,
                   ylabel: str) -> None:
    """Minimal dependency-free SVG line chart with optional error bars."""
    w, h, m = 640, 400, 60
    x0, x1 = min(xs), max(xs)
    y_low = min(y - (e or 0.0) for y, e in zip(ys, yerr or [0.0] * len(ys)))
    y_high = max(y + (e or 0.0) for y, e in zip(ys, yerr or [0.0] * len(ys)))
    if x1 <= x0:
        x1 = x0 + 1.0
    if y_high <= y_low:
        y_high = y_low + 1.0
    pad = 0.1 * (y_high - y_low)
    y_low, y_high = y_low - pad, y_high + pad

    def sx(x):
        return m + (x - x0) / (x1 - x0) * (w - 2 * m)

    def sy(y):
        return h - m - (y - y_low) / (y_high - y_low) * (h - 2 * m)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{w / 2}" y="{h - 12}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="16" y="{h / 2}" transform="rotate(-90 16 {h / 2})" '
        f'text-anchor="middle" font-size="12">{ylabel}</text>',
        f'<line x1="{m}" y1="{h - m}" x2="{w - m}" y2="{h - m}" stroke="black"/>',
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{h - m}" stroke="black"/>',
    ]
    for x, y in zip(xs, ys):
        parts.append(f'<text x="{sx(x)}" y="{h - m + 16}" text-anchor="middle" '
                     f'font-size="10">{x:g}</text>')
        parts.append(f'<text x="{m - 6}" y="{sy(y) + 3}" text-anchor="end" '
                     f'font-size="10">{y:.3g}</text>')
    pts = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="steelblue" '
                 f'stroke-width="2"/>')
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" '
                     f'fill="steelblue"/>')
    if yerr is not None:
        for x, y, e in zip(xs, ys, yerr):
            parts.append(f'<line x1="{sx(x):.1f}" y1="{sy(y - e):.1f}" '
                         f'x2="{sx(x):.1f}" y2="{sy(y + e):.1f}" stroke="gray"/>')
    parts.append("</svg>")
    path.write_text("\n".join(parts))


# ---------------------------------------------------------------------------
# experiments


def experiment_timestep(instances: int, taus: list[float], n_robots: int,
                        seed: int, out_dir: Path, time_limit: float = 120.0,
                        threads: int = 1, scenario_factory=None,
                        log=print) -> dict:
    """Relative optimality loss of coarser time steps vs the finest one."""
    taus = sorted(taus)
    base_tau = taus[0]
    factory = scenario_factory or (
        lambda k: random_geometric_scenario(n_robots, seed + k))
    losses: dict[float, list[float]] = {t: [] for t in taus}
    dropped = 0
    for k in range(instances):
        scn = factory(k)
        sojourn: dict[float, float] = {}
        ok = True
        for tau in taus:
            try:
                outcome = solve_scenario(scn, tau=tau, time_limit=time_limit,
                                         threads=threads, verify=False)
            except (ParseError, TrajectoryError):
                ok = False
                break
            if outcome.report.status != "optimal":
                ok = False
                break
            sojourn[tau] = outcome.metrics.mean_sojourn
        if not ok:
            dropped += 1
            log(f"instance {k}: dropped (sub-solve not optimal in budget)")
            continue
        for tau in taus:
            losses[tau].append((sojourn[tau] - sojourn[base_tau]) / sojourn[base_tau])
    rows = []
    for tau in taus:
        vals = np.asarray(losses[tau])
        rows.append({"tau": tau,
                     "mean_loss": float(vals.mean()) if vals.size else math.nan,
                     "std_loss": float(vals.std()) if vals.size else math.nan,
                     "instances": int(vals.size)})
    slope = float(np.polyfit([r["tau"] for r in rows],
                             [r["mean_loss"] for r in rows], 1)[0]) if rows else math.nan
    out_dir.mkdir(parents=True, exist_ok=True)
    csv = "tau,mean_loss,std_loss,instances\n" + "".join(
        f'{r["tau"]},{r["mean_loss"]:.6f},{r["std_loss"]:.6f},{r["instances"]}\n'
        for r in rows)
    (out_dir / "timestep_loss.csv").write_text(csv)
    svg_line_chart(out_dir / "timestep_loss.svg",
                   [r["tau"] for r in rows], [r["mean_loss"] for r in rows],
                   [r["std_loss"] for r in rows],
                   "Relative optimality loss vs time step",
                   "time step duration (s)", "relative loss")
    log(f"timestep experiment: slope {slope * 100:.2f}% per second, "
        f"{dropped} dropped")
    return {"rows": rows, "slope": slope, "dropped": dropped,
            "per_instance": losses}


def experiment_runtime(counts: list[int], tau: float, instances: int, seed: int,
                       out_dir: Path, time_limit: float = 120.0,
                       horizon: float = 30.0, threads: int = 1,
                       log=print) -> dict:
    """Average wall time of the built-in solver per vehicle count, plus the
    model-build + export share (the external-solver path's cost)."""
    rows = []
    for n in counts:
        solve_times, build_times, censored = [], [], 0
        for k in range(instances):
            scn = random_geometric_scenario(n, seed + 1000 * n + k,
                                            horizon=horizon)
            zones = scn.build_zones()
            disc = scn.discretization(tau, horizon)
            t0 = time.perf_counter()
            model = build_model(scn.robots, zones, disc, ModelOptions())
            blob = export_model(model, "mps")
            build_times.append(time.perf_counter() - t0)
            assert blob
            t0 = time.perf_counter()
            report = solve_milp(model, SolveLimits(time_limit=time_limit),
                                threads=threads)
            wall = time.perf_counter() - t0
            if report.status == "optimal":
                solve_times.append(wall)
            else:
                censored += 1
        rows.append({
            "n": n,
            "mean_solve": float(np.mean(solve_times)) if solve_times else math.nan,
            "mean_build_export": float(np.mean(build_times)),
            "solved": len(solve_times),
            "censored": censored,
        })
        log(f"n={n}: solve {rows[-1]['mean_solve']:.3f}s "
            f"build+export {rows[-1]['mean_build_export']:.3f}s "
            f"censored {censored}")
    out_dir.mkdir(parents=True, exist_ok=True)
    csv = "n,mean_solve_s,mean_build_export_s,solved,censored\n" + "".join(
        f'{r["n"]},{r["mean_solve"]:.6f},{r["mean_build_export"]:.6f},'
        f'{r["solved"]},{r["censored"]}\n' for r in rows)
    (out_dir / "runtime.csv").write_text(csv)
    svg_line_chart(out_dir / "runtime.svg", [r["n"] for r in rows],
                   [r["mean_solve"] for r in rows], None,
                   "Average solve time vs vehicle count", "vehicles",
                   "seconds")
    return {"rows": rows}


# ---------------------------------------------------------------------------
# argument parsing and entry point


def _add_common_solve_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau", type=float, default=None, help="time step override (s)")
    p.add_argument("--horizon", type=float, default=None,
                   help="planning horizon override (s)")
    p.add_argument("--seed", type=int, default=None, help="seed override")
    p.add_argument("--no-tiebreak", action="store_true",
                   help="drop the averaged-speed objective term")
    p.add_argument("--no-cuts", action="store_true",
                   help="drop the monotonicity strengthening cuts")
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", type=Path, default=Path("out"),
                   help="output directory")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathsync",
        description="Time-optimal coordination of robots on fixed paths")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one scenario to proven optimality")
    p.add_argument("scenario", type=Path)
    _add_common_solve_flags(p)
    p.add_argument("--force-priorities", type=str, default=None,
                   help="comma list like '1>3,3>2' pinning pass orders")
    p.add_argument("--solver", choices=("builtin", "export-only"),
                   default="builtin")
    p.add_argument("--format", choices=("mps", "lp"), default="mps",
                   help="format for --solver export-only")

    p = sub.add_parser("verify", help="re-verify a written trajectory file")
    p.add_argument("scenario", type=Path)
    p.add_argument("--trajectories", type=Path, required=True)
    p.add_argument("--dt", type=float, default=None)

    p = sub.add_parser("receding", help="solve in arrival batches")
    p.add_argument("scenario", type=Path)
    p.add_argument("--window", type=float, required=True,
                   help="batch window (s)")
    _add_common_solve_flags(p)

    p = sub.add_parser("gen", help="generate a random Poisson scenario")
    p.add_argument("--rate", type=float, default=0.05,
                   help="vehicles per second per route")
    p.add_argument("--duration", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("export", help="write the model to MPS/LP text")
    p.add_argument("scenario", type=Path)
    p.add_argument("--format", choices=("mps", "lp"), default="mps")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("exp-timestep", help="time-step sensitivity experiment")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--taus", type=str, default="0.25,0.5,1,2")
    p.add_argument("--n-robots", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=120.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", type=Path, default=Path("out"))

    p = sub.add_parser("exp-runtime", help="runtime scaling experiment")
    p.add_argument("--counts", type=str, default="1,2,3,4")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--instances", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=120.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", type=Path, default=Path("out"))
    return parser


def _cmd_solve(args) -> int:
    scn = load_scenario(args.scenario)
    if args.solver == "export-only":
        zones = scn.build_zones()
        disc = scn.discretization(args.tau, args.horizon)
        model = build_model(scn.robots, zones, disc, ModelOptions(
            tie_break=not args.no_tiebreak, cuts=not args.no_cuts))
        args.out.mkdir(parents=True, exist_ok=True)
        target = args.out / f"model.{args.format}"
        target.write_bytes(export_model(model, args.format))
        print(f"wrote {target}")
        return EXIT_OK
    forced = None
    if args.force_priorities:
        forced = parse_forced_priorities(args.force_priorities,
                                         {r.id for r in scn.robots})
    t0 = time.perf_counter()
    outcome = solve_scenario(
        scn, tau=args.tau, horizon=args.horizon, force_priorities=forced,
        tie_break=not args.no_tiebreak, cuts=not args.no_cuts,
        time_limit=args.time_limit, threads=args.threads)
    wall = time.perf_counter() - t0
    write_solution_files(args.out, outcome, scn, wall)
    rep = outcome.report
    if rep.status == "optimal":
        print(f"optimal: objective {rep.objective:.6f}, "
              f"mean sojourn {outcome.metrics.mean_sojourn:.3f} s, "
              f"{rep.nodes} nodes, {wall:.2f} s")
        if outcome.graph is not None and outcome.graph.edges:
            print("priorities: " + ", ".join(
                sorted(f"{w}>{l}" for w, l in outcome.graph.edges)))
    else:
        print(f"{rep.status}: {outcome.infeasibility_hint or ''}")
    return outcome.exit_code


def _cmd_verify(args) -> int:
    scn = load_scenario(args.scenario)
    trajs = parse_trajectories_csv(args.trajectories.read_text())
    zones = scn.build_zones()
    dt = args.dt or scn.tau / 20.0
    specs = scn.specs_by_id() if scn.mode == "geometric" else None
    report = verify_safety(trajs, zones, dt=dt, specs=specs)
    m = compute_metrics(trajs, scn.robots, zones=zones, dt=dt)
    if report.ok:
        print(f"clean: {len(trajs)} trajectories, min clearance "
              f"{report.min_clearance:.3f} m, mean sojourn {m.mean_sojourn:.3f} s")
        return EXIT_OK
    for v in report.violations[:10]:
        print(f"violation: pair {v.pair} at t={v.time:.3f}s "
              f"config=({v.config[0]:.2f},{v.config[1]:.2f}) [{v.kind}]")
    return EXIT_INFEASIBLE


def _cmd_receding(args) -> int:
    scn = load_scenario(args.scenario)
    t0 = time.perf_counter()
    outcome, batch_log = receding_solve(
        scn, window=args.window, tau=args.tau, horizon=args.horizon,
        tie_break=not args.no_tiebreak, cuts=not args.no_cuts,
        time_limit=args.time_limit, threads=args.threads)
    wall = time.perf_counter() - t0
    write_solution_files(args.out, outcome, scn, wall)
    (args.out / "batches.json").write_text(json.dumps(batch_log, indent=2) + "\n")
    print(f"receding: {len(batch_log)} batches, composite objective "
          f"{outcome.report.objective:.6f}, mean sojourn "
          f"{outcome.metrics.mean_sojourn:.3f} s")
    return outcome.exit_code


def _cmd_gen(args) -> int:
    scn = gen_scenario(ArrivalModel(rate=args.rate), duration=args.duration,
                       seed=args.seed, tau=args.tau)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(dump_scenario(scn))
    print(f"wrote {args.out} with {len(scn.robots)} vehicles")
    return EXIT_OK


def _cmd_export(args) -> int:
    scn = load_scenario(args.scenario)
    zones = scn.build_zones()
    disc = scn.discretization(args.tau, args.horizon)
    model = build_model(scn.robots, zones, disc, ModelOptions())
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_bytes(export_model(model, args.format))
    print(f"wrote {args.out} ({model.n_cols} columns, "
          f"{len(model.constraints)} rows)")
    return EXIT_OK


def _cmd_exp_timestep(args) -> int:
    taus = [float(t) for t in args.taus.split(",")]
    experiment_timestep(args.instances, taus, args.n_robots, args.seed,
                        args.out, time_limit=args.time_limit,
                        threads=args.threads)
    return EXIT_OK


def _cmd_exp_runtime(args) -> int:
    counts = [int(c) for c in args.counts.split(",")]
    if counts != sorted(counts):
        raise ParseError("--counts must be ascending")
    experiment_runtime(counts, args.tau, args.instances, args.seed, args.out,
                       time_limit=args.time_limit, threads=args.threads)
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "receding": _cmd_receding,
    "gen": _cmd_gen,
    "export": _cmd_export,
    "exp-timestep": _cmd_exp_timestep,
    "exp-runtime": _cmd_exp_runtime,
}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, FileNotFoundError, TrajectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
