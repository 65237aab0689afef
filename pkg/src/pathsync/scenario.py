"""Scenario files, the built-in intersection template and random generators.

A scenario is a JSON document (conventionally `.scn`) with a `mode`
discriminator:

* `abstract` scenarios carry explicit conflict-zone bounds per robot pair,
  so model-level behavior can be pinned down without any 2-D geometry;
* `geometric` scenarios carry 2-D paths (template route names or raw
  polylines); conflict zones are computed by collision-set sampling.

The built-in template is a two-lane four-approach intersection: lane width
3.5 m, right-turn radius 8 m, left-turn radius 12 m, coordination-region
half-size 30 m.  Routes are named `<approach>_<movement>` with approaches
N/E/S/W and movements L/S/R (e.g. `S_L` enters from the south and turns
left).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .geometry import (
    AbstractPath,
    CollisionPolygon,
    ConflictZone,
    GeometryError,
    PathGeometry,
    RobotSpec,
    conflict_zones,
    decompose,
    polygon_from_cuts,
)
from .model import Discretization, make_discretization

__all__ = [
    "ParseError",
    "ArrivalModel",
    "Scenario",
    "load_scenario",
    "loads_scenario",
    "dump_scenario",
    "template_routes",
    "TEMPLATE",
    "gen_scenario",
    "random_geometric_scenario",
    "random_abstract_scenario",
]

ROBOT_LENGTH = 5.0
ROBOT_WIDTH = 2.0
DEFAULT_ACCEL = (-3.0, 4.0)
DEFAULT_V_MAX = 15.0
DEFAULT_RESOLUTION = 0.1


class ParseError(ValueError):
    """Scenario validation failure; the message names the offending field."""


# ---------------------------------------------------------------------------
# intersection template


def _arc(center, radius, a0, a1, step_deg=2.0):
    n = max(2, int(math.ceil(abs(a1 - a0) / math.radians(step_deg))))
    ang = np.linspace(a0, a1, n + 1)
    return np.column_stack([center[0] + radius * np.cos(ang),
                            center[1] + radius * np.sin(ang)])


def _south_routes(half=30.0, lane=1.75, r_in=8.0, r_out=12.0):
    """Routes entering from the south (heading +y at x = +lane)."""
    routes = {}
    routes["S_S"] = np.array([(lane, -half), (lane, half)])
    arc = _arc((lane + r_in, -lane - r_in), r_in, math.pi, math.pi / 2.0)
    routes["S_R"] = np.vstack([[(lane, -half)], arc, [(half, -lane)]])
    arc = _arc((lane - r_out, lane - r_out), r_out, 0.0, math.pi / 2.0)
    routes["S_L"] = np.vstack([[(lane, -half)], arc, [(-half, lane)]])
    return routes


def _rot90(points: np.ndarray) -> np.ndarray:
    return np.column_stack([-points[:, 1], points[:, 0]])


def template_routes(half=30.0, lane=1.75, r_in=8.0, r_out=12.0) -> dict[str, np.ndarray]:
    south = _south_routes(half, lane, r_in, r_out)
    routes = {}
    for turns, approach in enumerate(("S", "E", "N", "W")):
        for move in ("S", "R", "L"):
            pts = south[f"S_{move}"]
            for _ in range(turns):
                pts = _rot90(pts)
            routes[f"{approach}_{move}"] = pts
    return routes


TEMPLATE = template_routes()


def _dedupe_polyline(points: np.ndarray) -> np.ndarray:
    keep = [points[0]]
    for p in points[1:]:
        if np.hypot(*(p - keep[-1])) > 1e-9:
            keep.append(p)
    return np.asarray(keep)


_ROUTE_GEOMETRY: dict[str, PathGeometry] = {}


def route_geometry(route: str) -> PathGeometry:
    if route not in TEMPLATE:
        raise ParseError(f"unknown template route {route!r}")
    if route not in _ROUTE_GEOMETRY:
        _ROUTE_GEOMETRY[route] = PathGeometry(
            _dedupe_polyline(TEMPLATE[route]),
            robot_length=ROBOT_LENGTH, robot_width=ROBOT_WIDTH)
    return _ROUTE_GEOMETRY[route]


# Route-pair conflicts depend only on geometry, never on the vehicles, and
# the following distance enters only the offset, so zones are cached with
# d_par = 0 and rebound at lookup.  A packaged JSON file precomputed from the
# template avoids paying the sampling cost on cold starts.
_ZONE_CACHE: dict[tuple, list[tuple[ConflictZone, ConflictZone]]] = {}
_TEMPLATE_ZONE_FILE = Path(__file__).parent / "data" / "template_zones.json"
_template_zone_data: dict | None = None


def _zone_to_raw(z: ConflictZone) -> dict:
    return {
        "robot_i": z.robot_i, "robot_j": z.robot_j,
        "par": [z.s_par_lo_i, z.s_par_hi_i, z.s_par_lo_j, z.s_par_hi_j],
        "perp": [z.s_perp_lo_i, z.s_perp_hi_i, z.s_perp_lo_j, z.s_perp_hi_j],
        "c": z.offset_aij,
        "kind": z.conflict_kind,
        "component": z.component,
        "polygon": None if z.polygon is None else z.polygon.vertices,
    }


def _zone_from_raw(raw: dict) -> ConflictZone:
    poly = raw["polygon"]
    return ConflictZone(
        robot_i=raw["robot_i"], robot_j=raw["robot_j"],
        polygon=None if poly is None else CollisionPolygon(
            [tuple(p) for p in poly]),
        s_par_lo_i=raw["par"][0], s_par_hi_i=raw["par"][1],
        s_par_lo_j=raw["par"][2], s_par_hi_j=raw["par"][3],
        s_perp_lo_i=raw["perp"][0], s_perp_hi_i=raw["perp"][1],
        s_perp_lo_j=raw["perp"][2], s_perp_hi_j=raw["perp"][3],
        offset_aij=raw["c"], conflict_kind=raw["kind"],
        component=raw["component"])


def _compute_route_pair(route_a: str, route_b: str,
                        resolution: float) -> list[tuple[ConflictZone, ConflictZone]]:
    ga, gb = route_geometry(route_a), route_geometry(route_b)
    spec_a = RobotSpec(id="A", geometry=ga, s_out=ga.length + ROBOT_LENGTH,
                       t_in=0.0, v_in=10.0, v_out=10.0, v_max=15.0,
                       a_min=-3.0, a_max=4.0)
    spec_b = RobotSpec(id="B", geometry=gb, s_out=gb.length + ROBOT_LENGTH,
                       t_in=0.0, v_in=10.0, v_out=10.0, v_max=15.0,
                       a_min=-3.0, a_max=4.0)
    return conflict_zones(spec_a, spec_b, d_par=0.0, resolution=resolution)


def _load_template_zone_data() -> dict:
    global _template_zone_data
    if _template_zone_data is None:
        if _TEMPLATE_ZONE_FILE.exists():
            _template_zone_data = json.loads(_TEMPLATE_ZONE_FILE.read_text())
        else:
            _template_zone_data = {}
    return _template_zone_data


def _route_pair_zones(route_a: str, route_b: str, d_par: float,
                      resolution: float) -> list[tuple[ConflictZone, ConflictZone]]:
    """Directed zone pairs for two template routes, offsets rebound to d_par."""
    base_key = (route_a, route_b, resolution)
    if base_key not in _ZONE_CACHE:
        stored = _load_template_zone_data().get(
            f"{route_a}|{route_b}|{resolution:g}")
        if stored is not None:
            _ZONE_CACHE[base_key] = [
                (_zone_from_raw(raw[0]), _zone_from_raw(raw[1]))
                for raw in stored]
        else:
            _ZONE_CACHE[base_key] = _compute_route_pair(route_a, route_b,
                                                        resolution)
    out = []
    for zij, zji in _ZONE_CACHE[base_key]:
        out.append((
            replace(zij, offset_aij=(zij.offset_aij + d_par
                                     if not zij.par_empty else 0.0)),
            replace(zji, offset_aij=(zji.offset_aij + d_par
                                     if not zji.par_empty else 0.0)),
        ))
    return out


def build_template_zone_cache(path: Path | None = None,
                              resolution: float = DEFAULT_RESOLUTION,
                              log=print) -> dict:
    """Precompute all route-pair conflict zones and store them as JSON."""
    path = path or _TEMPLATE_ZONE_FILE
    names = sorted(TEMPLATE)
    data: dict[str, list] = {}
    for i, ra in enumerate(names):
        for rb in names[i:]:
            pairs = _compute_route_pair(ra, rb, resolution)
            data[f"{ra}|{rb}|{resolution:g}"] = [
                [_zone_to_raw(zij), _zone_to_raw(zji)] for zij, zji in pairs]
            if rb != ra:
                flipped = [[_zone_to_raw(zji), _zone_to_raw(zij)]
                           for zij, zji in pairs]
                data[f"{rb}|{ra}|{resolution:g}"] = flipped
            log(f"{ra} x {rb}: {len(pairs)} components")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data))
    return data


# ---------------------------------------------------------------------------
# scenario data model


@dataclass
class ArrivalModel:
    """Poisson arrivals per route with truncated-normal entry speeds."""

    rate: float = 0.05           # vehicles per second per route
    speed_mean: float = 12.0
    speed_std: float = 3.0
    speed_lo: float = 10.0
    speed_hi: float = 15.0
    routes: tuple[str, ...] = tuple(sorted(TEMPLATE))
    min_headway: float = 2.5     # seconds between entries on one approach

    def __post_init__(self) -> None:
        if self.rate <= 0.0:
            raise ParseError("arrival rate must be positive")
        if self.speed_lo > self.speed_hi:
            raise ParseError("speed truncation range is inverted")
        if self.speed_lo < 0.0 or self.speed_hi > DEFAULT_V_MAX:
            raise ParseError("speed truncation must stay within [0, v_max]")


@dataclass
class Scenario:
    mode: str
    robots: list[RobotSpec]
    zones: list[ConflictZone] = field(default_factory=list)  # abstract mode
    routes: dict[str, str] = field(default_factory=dict)     # robot id -> route
    d_par: float = 2.0
    tau: float = 0.25
    horizon: float = 30.0
    seed: int | None = None
    description: str = ""
    resolution: float = DEFAULT_RESOLUTION

    def discretization(self, tau: float | None = None,
                       horizon: float | None = None) -> Discretization:
        return make_discretization(self.robots, tau or self.tau,
                                   horizon or self.horizon)

    def build_zones(self) -> list[ConflictZone]:
        """Directed zones for the model: stored ones (abstract mode) or
        geometry-derived ones (geometric mode, cached per route pair)."""
        if self.mode == "abstract":
            return list(self.zones)
        zones: list[ConflictZone] = []
        robots = self.robots
        for i, ra in enumerate(robots):
            for rb in robots[i + 1:]:
                route_a, route_b = self.routes[ra.id], self.routes[rb.id]
                for zij, zji in _route_pair_zones(route_a, route_b, self.d_par,
                                                  self.resolution):
                    zones.append(replace(zij, robot_i=ra.id, robot_j=rb.id))
                    zones.append(replace(zji, robot_i=rb.id, robot_j=ra.id))
        return zones

    def specs_by_id(self) -> dict[str, RobotSpec]:
        return {r.id: r for r in self.robots}


# ---------------------------------------------------------------------------
# JSON (de)serialization


def _need(obj: Mapping, key: str, path: str):
    if key not in obj:
        raise ParseError(f"{path}.{key}: missing required field")
    return obj[key]


def _number(obj: Mapping, key: str, path: str, default=None):
    if key not in obj:
        if default is not None:
            return default
        raise ParseError(f"{path}.{key}: missing required field")
    val = obj[key]
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ParseError(f"{path}.{key}: expected a number, got {val!r}")
    return float(val)


def _robot_from_json(obj, mode, idx):
    path = f"robots[{idx}]"
    rid = _need(obj, "id", path)
    if not isinstance(rid, str) or not rid or not all(
            ch.isalnum() or ch == "_" for ch in rid):
        raise ParseError(f"{path}.id: must be a nonempty alphanumeric string")
    kin = dict(
        t_in=_number(obj, "t_in", path, 0.0),
        v_in=_number(obj, "v_in", path),
        v_out=_number(obj, "v_out", path, DEFAULT_V_MAX),
        v_max=_number(obj, "v_max", path, DEFAULT_V_MAX),
        a_min=_number(obj, "a_min", path, DEFAULT_ACCEL[0]),
        a_max=_number(obj, "a_max", path, DEFAULT_ACCEL[1]),
    )
    route = None
    try:
        if mode == "abstract":
            s_out = _number(obj, "s_out", path)
            spec = RobotSpec(id=rid, geometry=AbstractPath(s_out=s_out),
                             s_out=s_out, **kin)
        else:
            if "route" in obj:
                route = obj["route"]
                geom = route_geometry(route)
            elif "polyline" in obj:
                geom = PathGeometry(obj["polyline"],
                                    robot_length=_number(obj, "length", path, ROBOT_LENGTH),
                                    robot_width=_number(obj, "width", path, ROBOT_WIDTH))
            else:
                raise ParseError(f"{path}: geometric robots need 'route' or 'polyline'")
            s_out = _number(obj, "s_out", path,
                            geom.length + geom.robot_length)
            spec = RobotSpec(id=rid, geometry=geom, s_out=s_out, **kin)
    except GeometryError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return spec, route


def _reconstruct_polygon(fwd: ConflictZone, rev: ConflictZone, d_par: float,
                         domain: tuple[float, float]) -> CollisionPolygon | None:
    """Rebuild the component polygon from the two directed completions.

    Exact for every shape in the taxonomy (boxes cut by slope-1 bands), which
    is all `decompose` emits; lets abstract scenarios be safety-verified."""
    cuts = []
    if not fwd.perp_empty:
        cuts.append((0.0, -1.0, -fwd.s_perp_lo_j))          # y >= bottom
        x_max = fwd.s_par_lo_i if not fwd.par_empty else fwd.s_perp_hi_i
    else:
        x_max = fwd.s_par_hi_i
    if not rev.perp_empty:
        cuts.append((-1.0, 0.0, -rev.s_perp_lo_j))          # x >= left
        y_max = rev.s_par_lo_i if not rev.par_empty else rev.s_perp_hi_i
    else:
        y_max = rev.s_par_hi_i
    cuts.append((1.0, 0.0, x_max))
    cuts.append((0.0, 1.0, y_max))
    if not fwd.par_empty:
        cuts.append((1.0, -1.0, fwd.offset_aij - d_par))    # x - y <= c_fwd
    if not rev.par_empty:
        cuts.append((-1.0, 1.0, rev.offset_aij - d_par))    # y - x <= c_rev
    try:
        return polygon_from_cuts(domain, cuts)
    except GeometryError:
        return None


def _bounds_block(obj, path):
    if obj is None:
        return None
    if not (isinstance(obj, list) and len(obj) == 4):
        raise ParseError(f"{path}: expected [lo_i, hi_i, lo_j, hi_j] or null")
    vals = []
    for k, v in enumerate(obj):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ParseError(f"{path}[{k}]: expected a number")
        if v < 0:
            raise ParseError(f"{path}[{k}]: bounds must be nonnegative")
        vals.append(float(v))
    if vals[0] > vals[1] or vals[2] > vals[3]:
        raise ParseError(f"{path}: lower bound exceeds upper bound")
    return vals


def _directed_zone(obj, path, robot_i, robot_j, component):
    par = _bounds_block(obj.get("par"), f"{path}.par")
    perp = _bounds_block(obj.get("perp"), f"{path}.perp")
    offset = _number(obj, "offset", path, 0.0)
    if par is None and perp is None:
        raise ParseError(f"{path}: at least one of par/perp must be present")
    z = par or [0.0, 0.0, 0.0, 0.0]
    q = perp or [0.0, 0.0, 0.0, 0.0]
    try:
        return ConflictZone(
            robot_i=robot_i, robot_j=robot_j, polygon=None,
            s_par_lo_i=z[0], s_par_hi_i=z[1], s_par_lo_j=z[2], s_par_hi_j=z[3],
            s_perp_lo_i=q[0], s_perp_hi_i=q[1], s_perp_lo_j=q[2], s_perp_hi_j=q[3],
            offset_aij=offset, conflict_kind=obj.get("kind", "unspecified"),
            component=component)
    except GeometryError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def loads_scenario(text: str | bytes) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: "
                         f"{exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("scenario root must be a JSON object")
    mode = _need(doc, "mode", "scenario")
    if mode not in ("abstract", "geometric"):
        raise ParseError(f"scenario.mode: expected 'abstract' or 'geometric', got {mode!r}")
    tau = _number(doc, "tau", "scenario", 0.25)
    horizon = _number(doc, "horizon", "scenario", 30.0)
    d_par = _number(doc, "d_par", "scenario", 2.0)
    if tau <= 0:
        raise ParseError("scenario.tau: must be positive")
    if d_par < 0:
        raise ParseError("scenario.d_par: must be nonnegative")
    robots_json = _need(doc, "robots", "scenario")
    if not isinstance(robots_json, list) or not robots_json:
        raise ParseError("scenario.robots: must be a nonempty list")
    robots = []
    routes = {}
    for idx, robj in enumerate(robots_json):
        spec, route = _robot_from_json(robj, mode, idx)
        robots.append(spec)
        if route is not None:
            routes[spec.id] = route
    ids = [r.id for r in robots]
    if len(set(ids)) != len(ids):
        raise ParseError("scenario.robots: duplicate robot ids")
    if mode == "geometric":
        missing = [r.id for r in robots if r.id not in routes
                   and not isinstance(r.geometry, PathGeometry)]
        if missing:
            raise ParseError(f"scenario.robots: missing geometry for {missing}")

    zones: list[ConflictZone] = []
    if mode == "abstract":
        by_id = {r.id: r for r in robots}
        for zidx, zobj in enumerate(doc.get("zones", [])):
            path = f"zones[{zidx}]"
            pair = _need(zobj, "robots", path)
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ParseError(f"{path}.robots: expected [id_i, id_j]")
            ri, rj = pair
            for rid in (ri, rj):
                if rid not in by_id:
                    raise ParseError(f"{path}.robots: unknown robot {rid!r}")
            if ri == rj:
                raise ParseError(f"{path}.robots: zone must reference two robots")
            component = int(_number(zobj, "component", path, 0.0))
            fwd = _directed_zone(_need(zobj, "i_over_j", path),
                                 f"{path}.i_over_j", ri, rj, component)
            rev = _directed_zone(_need(zobj, "j_over_i", path),
                                 f"{path}.j_over_i", rj, ri, component)
            poly = _reconstruct_polygon(fwd, rev, d_par,
                                        (by_id[ri].s_out, by_id[rj].s_out))
            if poly is not None:
                fwd = replace(fwd, polygon=poly)
                rev = replace(rev, polygon=CollisionPolygon(
                    [(y, x) for x, y in reversed(poly.vertices)]))
            zones.extend([fwd, rev])

    seed = doc.get("seed")
    return Scenario(mode=mode, robots=robots, zones=zones, routes=routes,
                    d_par=d_par, tau=tau, horizon=horizon, seed=seed,
                    description=doc.get("description", ""),
                    resolution=_number(doc, "resolution", "scenario",
                                       DEFAULT_RESOLUTION))


def load_scenario(path) -> Scenario:
    return loads_scenario(Path(path).read_bytes())


def _zone_json(fwd: ConflictZone) -> dict:
    out = {}
    if not fwd.par_empty:
        out["par"] = [fwd.s_par_lo_i, fwd.s_par_hi_i, fwd.s_par_lo_j, fwd.s_par_hi_j]
    else:
        out["par"] = None
    if not fwd.perp_empty:
        out["perp"] = [fwd.s_perp_lo_i, fwd.s_perp_hi_i,
                       fwd.s_perp_lo_j, fwd.s_perp_hi_j]
    else:
        out["perp"] = None
    out["offset"] = fwd.offset_aij
    out["kind"] = fwd.conflict_kind
    return out


def dump_scenario(scn: Scenario) -> str:
    doc: dict = {
        "mode": scn.mode,
        "tau": scn.tau,
        "horizon": scn.horizon,
        "d_par": scn.d_par,
    }
    if scn.description:
        doc["description"] = scn.description
    if scn.seed is not None:
        doc["seed"] = scn.seed
    doc["robots"] = []
    for r in scn.robots:
        robj = {"id": r.id, "t_in": r.t_in, "v_in": r.v_in, "v_out": r.v_out,
                "v_max": r.v_max, "a_min": r.a_min, "a_max": r.a_max}
        if scn.mode == "abstract":
            robj["s_out"] = r.s_out
        elif r.id in scn.routes:
            robj["route"] = scn.routes[r.id]
            robj["s_out"] = r.s_out
        else:
            robj["polyline"] = np.asarray(r.geometry.polyline).tolist()
            robj["length"] = r.geometry.robot_length
            robj["width"] = r.geometry.robot_width
            robj["s_out"] = r.s_out
        doc["robots"].append(robj)
    if scn.mode == "abstract":
        groups: dict[tuple, dict] = {}
        for z in scn.zones:
            key = (z.pair, z.component)
            entry = groups.setdefault(key, {})
            first = z.robot_i == min(z.robot_i, z.robot_j)
            entry["fwd" if first else "rev"] = z
        doc["zones"] = []
        for (pair, component), entry in sorted(groups.items()):
            doc["zones"].append({
                "robots": list(pair),
                "component": component,
                "i_over_j": _zone_json(entry["fwd"]),
                "j_over_i": _zone_json(entry["rev"]),
            })
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# generators


def _truncated_normal(rng: np.random.Generator, mean, std, lo, hi) -> float:
    for _ in range(1000):
        v = rng.normal(mean, std)
        if lo <= v <= hi:
            return float(v)
    return float(min(max(mean, lo), hi))


def gen_scenario(arrivals: ArrivalModel, duration: float, seed: int,
                 tau: float = 0.5, horizon: float = 30.0,
                 d_par: float = 2.0) -> Scenario:
    """Seeded Poisson vehicle stream on the intersection template.

    Same-approach entries closer than the minimum headway are dropped so
    follower vehicles are never forced into the lead vehicle's safety gap at
    the region boundary.
    """
    if duration <= 0:
        raise ParseError("duration must be positive")
    rng = np.random.default_rng(seed)
    raw: list[tuple[float, str, float]] = []
    for route in arrivals.routes:
        t = 0.0
        while True:
            t += rng.exponential(1.0 / arrivals.rate)
            if t > duration:
                break
            speed = _truncated_normal(rng, arrivals.speed_mean, arrivals.speed_std,
                                      arrivals.speed_lo, arrivals.speed_hi)
            raw.append((float(t), route, speed))
    raw.sort()
    last_on_approach: dict[str, float] = {}
    robots, routes = [], {}
    for t_in, route, speed in raw:
        approach = route.split("_")[0]
        if t_in - last_on_approach.get(approach, -math.inf) < arrivals.min_headway:
            continue
        last_on_approach[approach] = t_in
        rid = f"v{len(robots):02d}"
        geom = route_geometry(route)
        robots.append(RobotSpec(
            id=rid, geometry=geom, s_out=geom.length + ROBOT_LENGTH,
            t_in=t_in, v_in=speed, v_out=DEFAULT_V_MAX, v_max=DEFAULT_V_MAX,
            a_min=DEFAULT_ACCEL[0], a_max=DEFAULT_ACCEL[1]))
        routes[rid] = route
    if not robots:
        raise ParseError("no vehicles generated; increase rate or duration")
    return Scenario(mode="geometric", robots=robots, routes=routes, d_par=d_par,
                    tau=tau, horizon=horizon, seed=seed,
                    description=f"poisson rate={arrivals.rate}/s/route duration={duration}s")


def random_geometric_scenario(n: int, seed: int, spread: float = 6.0,
                              tau: float = 0.5, horizon: float = 16.0,
                              d_par: float = 2.0,
                              min_headway: float = 2.5) -> Scenario:
    """Fixed-size random instance on the template (for experiments/tests)."""
    rng = np.random.default_rng(seed)
    route_names = sorted(TEMPLATE)
    robots, routes = [], {}
    entries: dict[str, list[float]] = {}
    guard = 0
    while len(robots) < n:
        guard += 1
        if guard > 200 * n:
            raise ParseError("could not place vehicles with the required headway")
        route = route_names[int(rng.integers(len(route_names)))]
        t_in = float(np.round(rng.uniform(0.0, spread), 2))
        approach = route.split("_")[0]
        if any(abs(t_in - t) < min_headway for t in entries.get(approach, [])):
            continue
        entries.setdefault(approach, []).append(t_in)
        speed = _truncated_normal(rng, 12.0, 3.0, 10.0, 15.0)
        rid = f"v{len(robots):02d}"
        geom = route_geometry(route)
        robots.append(RobotSpec(
            id=rid, geometry=geom, s_out=geom.length + ROBOT_LENGTH,
            t_in=t_in, v_in=speed, v_out=DEFAULT_V_MAX, v_max=DEFAULT_V_MAX,
            a_min=DEFAULT_ACCEL[0], a_max=DEFAULT_ACCEL[1]))
        routes[rid] = route
    robots.sort(key=lambda r: r.t_in)
    return Scenario(mode="geometric", robots=robots, routes=routes, d_par=d_par,
                    tau=tau, horizon=horizon, seed=seed,
                    description=f"random template instance n={n} seed={seed}")


def _abstract_zone_pair(rng: np.random.Generator, ra: RobotSpec, rb: RobotSpec,
                        d_par: float, component: int) -> list[ConflictZone]:
    dom = (ra.s_out, rb.s_out)
    kind = rng.choice(["crossing", "crossing", "crossing", "merging", "band"])
    lo_cap = min(dom) - 16.0
    if kind == "crossing":
        xa = float(rng.uniform(38.0, min(52.0, lo_cap)))
        xb = float(rng.uniform(38.0, min(52.0, lo_cap)))
        wa = float(rng.uniform(7.0, 11.0))
        wb = float(rng.uniform(7.0, 11.0))
        poly = polygon_from_cuts(dom, [(-1.0, 0.0, -xa), (1.0, 0.0, xa + wa),
                                       (0.0, -1.0, -xb), (0.0, 1.0, xb + wb)])
    elif kind == "merging":
        off = float(rng.uniform(-8.0, 8.0))
        half = ROBOT_LENGTH + 1.0
        yb = float(rng.uniform(40.0, min(50.0, lo_cap)))
        poly = polygon_from_cuts(dom, [(1.0, -1.0, off + half),
                                       (-1.0, 1.0, -(off - half)),
                                       (0.0, -1.0, -yb)])
    else:  # full following band
        off = float(rng.uniform(-3.0, 3.0))
        half = ROBOT_LENGTH + 1.0
        poly = polygon_from_cuts(dom, [(1.0, -1.0, off + half),
                                       (-1.0, 1.0, -(off - half))])
    return [
        decompose(poly, d_par, dom, "i_over_j", robot_i=ra.id, robot_j=rb.id,
                  component=component),
        decompose(poly, d_par, dom, "j_over_i", robot_i=ra.id, robot_j=rb.id,
                  component=component),
    ]


def random_abstract_scenario(n: int, seed: int, max_zones: int = 4,
                             tau: float = 1.0, horizon: float = 20.0,
                             d_par: float = 2.0,
                             t_spread: float = 4.0) -> Scenario:
    """Random abstract instance with up to `max_zones` conflict components."""
    rng = np.random.default_rng(seed)
    robots = []
    for i in range(n):
        s_out = float(np.round(rng.uniform(65.0, 90.0), 2))
        robots.append(RobotSpec(
            id=f"r{i}", geometry=AbstractPath(s_out=s_out), s_out=s_out,
            t_in=float(np.round(rng.uniform(0.0, t_spread), 2)),
            v_in=float(np.round(rng.uniform(8.0, 14.0), 2)),
            v_out=DEFAULT_V_MAX, v_max=DEFAULT_V_MAX,
            a_min=DEFAULT_ACCEL[0], a_max=DEFAULT_ACCEL[1]))
    pairs = [(a, b) for i, a in enumerate(robots) for b in robots[i + 1:]]
    order = rng.permutation(len(pairs))
    count = int(rng.integers(1, max_zones + 1))
    zones: list[ConflictZone] = []
    for comp, idx in enumerate(order[:count]):
        ra, rb = pairs[int(idx)]
        zpair = _abstract_zone_pair(rng, ra, rb, d_par, component=0)
        # band zones between simultaneous arrivals are unsafe at entry;
        # keep them only when the entries are well separated
        if not zpair[0].par_empty and zpair[0].s_par_lo_i == 0.0:
            if abs(ra.t_in - rb.t_in) < 1.5:
                continue
        zones.extend(zpair)
    return Scenario(mode="abstract", robots=robots, zones=zones, d_par=d_par,
                    tau=tau, horizon=horizon, seed=seed,
                    description=f"random abstract instance n={n} seed={seed}")
