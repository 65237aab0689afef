"""Path geometry, pairwise collision sets and their decomposition.

Positions along a path are measured by the curvilinear abscissa of the robot
front, with 0 at the point where the front enters the coordination region.
A pair of robots induces a set of colliding position pairs (s_i, s_j); this
module samples that set, wraps it in a minimal bounding polygon whose edges
are axis-parallel or slope-1, and decomposes the priority-completed set into
the "wait" (perpendicular) and "follow" (parallel) parts consumed by the
optimization model.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

__all__ = [
    "GeometryError",
    "PathGeometry",
    "AbstractPath",
    "RobotSpec",
    "CollisionSamples",
    "CollisionPolygon",
    "ConflictZone",
    "arc_pose",
    "footprint",
    "rectangles_intersect",
    "compute_collision_set",
    "split_components",
    "bounding_polygon",
    "decompose",
    "conflict_zones",
    "samples_to_csv",
]

# Direction tolerance when classifying polygon edges.
_EDGE_TOL = 1e-7
# Coordinate tolerance for "sits on the domain boundary" tests.
_DOMAIN_TOL = 1e-7


class GeometryError(ValueError):
    """Invalid geometric input or unsupported geometric operation."""


@dataclass
class PathGeometry:
    """A fixed 2-D path plus the rectangular footprint that slides along it.

    The polyline covers the portion of the path inside the coordination
    region; it is extended linearly at both ends so footprints near the
    boundaries are well defined.
    """

    polyline: Sequence[Sequence[float]]
    robot_length: float
    robot_width: float

    def __post_init__(self) -> None:
        pts = np.asarray(self.polyline, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise GeometryError("polyline must contain at least 2 planar points")
        seg = np.diff(pts, axis=0)
        seglen = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(seglen <= 0.0):
            raise GeometryError("consecutive polyline points must be distinct")
        if self.robot_length <= 0.0 or self.robot_width <= 0.0:
            raise GeometryError("robot dimensions must be positive")
        self._pts = pts
        self._dirs = seg / seglen[:, None]
        self._cum = np.concatenate([[0.0], np.cumsum(seglen)])
        if self.length < self.robot_length:
            raise GeometryError("path shorter than the robot riding on it")

    @property
    def length(self) -> float:
        return float(self._cum[-1])

    def _segment_of(self, q: float) -> int:
        # Segment whose arc interval contains q; ends clamp to the end segments.
        idx = int(np.searchsorted(self._cum, q, side="right")) - 1
        return min(max(idx, 0), len(self._dirs) - 1)

    def point_at(self, q: float) -> np.ndarray:
        """Point at arc position q, extending the end segments linearly."""
        i = self._segment_of(q)
        return self._pts[i] + (q - self._cum[i]) * self._dirs[i]

    def heading_at(self, q: float) -> np.ndarray:
        """Unit tangent of the segment under arc position q."""
        return self._dirs[self._segment_of(q)]

    def vertex_positions(self) -> np.ndarray:
        """Arc positions of the interior polyline vertices."""
        return self._cum[1:-1]


@dataclass
class AbstractPath:
    """Placeholder geometry for scenarios that specify conflict zones directly."""

    s_out: float

    def __post_init__(self) -> None:
        if self.s_out <= 0.0:
            raise GeometryError("s_out must be positive")


@dataclass
class RobotSpec:
    """One robot: its path, entry/exit conditions and kinodynamic bounds."""

    id: str
    geometry: PathGeometry | AbstractPath
    s_out: float
    t_in: float
    v_in: float
    v_out: float
    v_max: float
    a_min: float
    a_max: float

    def __post_init__(self) -> None:
        if self.s_out <= 0.0:
            raise GeometryError(f"robot {self.id}: s_out must be positive")
        if not (0.0 <= self.v_in <= self.v_max):
            raise GeometryError(f"robot {self.id}: v_in must lie in [0, v_max]")
        if not (0.0 <= self.v_out <= self.v_max):
            raise GeometryError(f"robot {self.id}: v_out must lie in [0, v_max]")
        if not (self.a_min < 0.0 < self.a_max):
            raise GeometryError(f"robot {self.id}: need a_min < 0 < a_max")
        if self.t_in < 0.0:
            raise GeometryError(f"robot {self.id}: t_in must be nonnegative")

    @property
    def has_geometry(self) -> bool:
        return isinstance(self.geometry, PathGeometry)


def _oriented_rectangle(center: np.ndarray, direction: np.ndarray,
                        half_len: float, half_wid: float) -> np.ndarray:
    """Corner array (4, 2), counter-clockwise."""
    u = direction
    n = np.array([-u[1], u[0]])
    return np.array([
        center - half_len * u - half_wid * n,
        center + half_len * u - half_wid * n,
        center + half_len * u + half_wid * n,
        center - half_len * u + half_wid * n,
    ])


def arc_pose(path: PathGeometry, s: float) -> np.ndarray:
    """Oriented rectangle occupied by the robot whose front sits at abscissa s.

    The rectangle is centered at arc position s - L/2 and aligned with the
    polyline segment under that center.  s may run past the polyline end by
    up to one robot length so the rear can clear the region.
    """
    total = path.length + path.robot_length
    if not (-1e-9 <= s <= total + 1e-9):
        raise GeometryError(f"abscissa {s} outside [0, {total}]")
    center_q = s - path.robot_length / 2.0
    return _oriented_rectangle(
        path.point_at(center_q), path.heading_at(center_q),
        path.robot_length / 2.0, path.robot_width / 2.0,
    )


def footprint(path: PathGeometry, s: float) -> list[np.ndarray]:
    """Conservative footprint as a union of per-segment rectangles.

    Over straight spans this is a single exact rectangle; where the body
    straddles polyline vertices it is one sliver rectangle per underlying
    segment, which over-approximates a rigid body bent along the path.
    """
    q0, q1 = s - path.robot_length, s
    cuts = [q for q in path.vertex_positions() if q0 + 1e-12 < q < q1 - 1e-12]
    breaks = [q0, *cuts, q1]
    rects = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (a + b)
        rects.append(_oriented_rectangle(
            path.point_at(mid), path.heading_at(mid),
            (b - a) / 2.0, path.robot_width / 2.0,
        ))
    return rects


def rectangles_intersect(a, b, tol: float = 1e-12) -> bool:
    """Separating-axis test for two convex quadrilaterals (touching counts
    unless tol is negative).  Hot path: plain-float arithmetic."""
    pa = a.tolist() if hasattr(a, "tolist") else a
    pb = b.tolist() if hasattr(b, "tolist") else b
    for poly in (pa, pb):
        for k in (0, 1):
            ax = poly[k][1] - poly[k + 1][1]
            ay = poly[k + 1][0] - poly[k][0]
            amin = amax = pa[0][0] * ax + pa[0][1] * ay
            for px, py in pa[1:]:
                v = px * ax + py * ay
                if v < amin:
                    amin = v
                elif v > amax:
                    amax = v
            bmin = bmax = pb[0][0] * ax + pb[0][1] * ay
            for px, py in pb[1:]:
                v = px * ax + py * ay
                if v < bmin:
                    bmin = v
                elif v > bmax:
                    bmax = v
            if amax < bmin - tol or bmax < amin - tol:
                return False
    return True


@dataclass
class CollisionSamples:
    """Grid samples of a pairwise collision set in (s_i, s_j) space."""

    points: np.ndarray          # (n, 2), lexicographically sorted
    resolution: float
    domain: tuple[float, float]  # (s_i_out, s_j_out)

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def empty(self) -> bool:
        return len(self.points) == 0

    def transpose(self) -> "CollisionSamples":
        pts = self.points[:, ::-1]
        order = np.lexsort((pts[:, 1], pts[:, 0]))
        return CollisionSamples(pts[order], self.resolution,
                                (self.domain[1], self.domain[0]))


def _sorted_samples(points: np.ndarray) -> np.ndarray:
    if len(points) == 0:
        return points.reshape(0, 2)
    order = np.lexsort((points[:, 1], points[:, 0]))
    return points[order]


class _FootprintGrid:
    """Per-path cache of footprints on a regular abscissa grid."""

    def __init__(self, path: PathGeometry, s_out: float, resolution: float):
        n = int(math.floor(s_out / resolution + 1e-9)) + 1
        self.svals = np.arange(n) * resolution
        self.rects = [footprint(path, s) for s in self.svals]
        self.centers = np.empty((n, 2))
        self.radii = np.empty(n)
        self.slice_centers = []
        self.slice_radii = []
        for k, rlist in enumerate(self.rects):
            corners = np.vstack(rlist)
            c = 0.5 * (corners.min(axis=0) + corners.max(axis=0))
            self.centers[k] = c
            self.radii[k] = np.hypot(*(corners - c).T).max()
            sc = np.array([0.25 * r.sum(axis=0) for r in rlist])
            sr = np.array([np.hypot(*(r - ctr).T).max()
                           for r, ctr in zip(rlist, sc)])
            self.slice_centers.append(sc)
            self.slice_radii.append(sr)


def _footprint_grid(spec: RobotSpec, resolution: float) -> _FootprintGrid:
    cache = getattr(spec.geometry, "_fp_cache", None)
    if cache is None:
        cache = {}
        spec.geometry._fp_cache = cache
    key = (round(spec.s_out, 9), round(resolution, 9))
    if key not in cache:
        cache[key] = _FootprintGrid(spec.geometry, spec.s_out, resolution)
    return cache[key]


def compute_collision_set(spec_i: RobotSpec, spec_j: RobotSpec,
                          resolution: float = 0.1) -> CollisionSamples:
    """Sample the set of front positions (s_i, s_j) where footprints overlap.

    Runs a rectangle-intersection sweep over a regular grid covering
    [0, s_i_out] x [0, s_j_out].  Bounding-circle prefilters (whole footprint
    first, then per slice) keep the exact axis tests to the near-conflict
    band; footprint grids are cached on the path objects.
    """
    if not (spec_i.has_geometry and spec_j.has_geometry):
        raise GeometryError("collision sampling requires PathGeometry on both robots")
    if resolution <= 0.0:
        raise GeometryError("resolution must be positive")

    gi = _footprint_grid(spec_i, resolution)
    gj = _footprint_grid(spec_j, resolution)

    d2 = ((gi.centers[:, None, :] - gj.centers[None, :, :]) ** 2).sum(axis=2)
    reach = (gi.radii[:, None] + gj.radii[None, :]) ** 2
    cand_i, cand_j = np.nonzero(d2 <= reach)

    hits = []
    for a, b in zip(cand_i, cand_j):
        ra, rb = gi.rects[a], gj.rects[b]
        if len(ra) == 1 and len(rb) == 1:
            if rectangles_intersect(ra[0], rb[0]):
                hits.append((gi.svals[a], gj.svals[b]))
            continue
        sc_a, sr_a = gi.slice_centers[a], gi.slice_radii[a]
        sc_b, sr_b = gj.slice_centers[b], gj.slice_radii[b]
        sd2 = ((sc_a[:, None, :] - sc_b[None, :, :]) ** 2).sum(axis=2)
        sreach = (sr_a[:, None] + sr_b[None, :]) ** 2
        pairs = np.nonzero(sd2 <= sreach)
        if any(rectangles_intersect(ra[u], rb[v])
               for u, v in zip(pairs[0], pairs[1])):
            hits.append((gi.svals[a], gj.svals[b]))
    pts = _sorted_samples(np.array(hits, dtype=float).reshape(-1, 2))
    return CollisionSamples(pts, resolution, (spec_i.s_out, spec_j.s_out))


def split_components(samples: CollisionSamples) -> list[CollisionSamples]:
    """Partition samples into 8-connected components on the sampling grid."""
    if samples.empty:
        return []
    res = samples.resolution
    idx = np.rint(samples.points / res).astype(int)
    off = idx.min(axis=0)
    idx -= off
    mask = np.zeros(idx.max(axis=0) + 1, dtype=bool)
    mask[idx[:, 0], idx[:, 1]] = True
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    comps = []
    for lbl in range(1, count + 1):
        ii, jj = np.nonzero(labels == lbl)
        pts = (np.column_stack([ii, jj]) + off) * res
        comps.append(CollisionSamples(_sorted_samples(pts), res, samples.domain))
    comps.sort(key=lambda c: (c.points[0, 0], c.points[0, 1]))
    return comps


@dataclass
class CollisionPolygon:
    """Convex polygon with axis-parallel or slope-1 edges, vertices CCW."""

    vertices: list[tuple[float, float]]

    def __post_init__(self) -> None:
        if len(self.vertices) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        self.vertices = [(float(x), float(y)) for x, y in self.vertices]
        for (x0, y0), (x1, y1) in self.edges():
            dx, dy = x1 - x0, y1 - y0
            norm = math.hypot(dx, dy)
            if norm <= 0.0:
                raise GeometryError("degenerate polygon edge")
            dx, dy = dx / norm, dy / norm
            ok = (abs(dy) < _EDGE_TOL or abs(dx) < _EDGE_TOL
                  or abs(dx - dy) < _EDGE_TOL)
            if not ok:
                raise GeometryError(
                    f"edge direction ({dx:.6f},{dy:.6f}) is not axis-parallel or slope-1")
        if self._signed_area() <= 0.0:
            raise GeometryError("polygon must be counter-clockwise and non-degenerate")

    def _signed_area(self) -> float:
        area = 0.0
        for (x0, y0), (x1, y1) in self.edges():
            area += x0 * y1 - x1 * y0
        return 0.5 * area

    def edges(self):
        n = len(self.vertices)
        for k in range(n):
            yield self.vertices[k], self.vertices[(k + 1) % n]

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Vectorized inside-or-on-boundary test (CCW half-plane checks)."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        inside = np.ones(len(pts), dtype=bool)
        for (x0, y0), (x1, y1) in self.edges():
            cross = (x1 - x0) * (pts[:, 1] - y0) - (y1 - y0) * (pts[:, 0] - x0)
            inside &= cross >= -tol
        return inside

    def strictly_contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        inside = np.ones(len(pts), dtype=bool)
        for (x0, y0), (x1, y1) in self.edges():
            cross = (x1 - x0) * (pts[:, 1] - y0) - (y1 - y0) * (pts[:, 0] - x0)
            inside &= cross > tol
        return inside

    def signed_distance(self, point: Sequence[float]) -> float:
        """Positive outside, negative inside; distance to the boundary."""
        p = np.asarray(point, dtype=float)
        verts = np.asarray(self.vertices)
        nxt = np.roll(verts, -1, axis=0)
        edge = nxt - verts
        rel = p[None, :] - verts
        t = np.clip((rel * edge).sum(axis=1) / (edge * edge).sum(axis=1), 0.0, 1.0)
        proj = verts + t[:, None] * edge
        dist = np.hypot(*(p[None, :] - proj).T).min()
        if bool(self.contains(p[None, :], tol=0.0)[0]):
            return -float(dist)
        return float(dist)


def _clip_halfplane(poly: list[tuple[float, float]], a: float, b: float,
                    c: float) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of a CCW polygon against a*x + b*y <= c."""
    out: list[tuple[float, float]] = []
    n = len(poly)
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        fp = a * p[0] + b * p[1] - c
        fq = a * q[0] + b * q[1] - c
        if fp <= 1e-12:
            out.append(p)
        if (fp < -1e-12 and fq > 1e-12) or (fp > 1e-12 and fq < -1e-12):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _dedupe_collinear(poly: list[tuple[float, float]]) -> list[tuple[float, float]]:
    pts = [p for k, p in enumerate(poly)
           if math.hypot(p[0] - poly[k - 1][0], p[1] - poly[k - 1][1]) > 1e-9]
    out = []
    n = len(pts)
    for k in range(n):
        prev, cur, nxt = pts[k - 1], pts[k], pts[(k + 1) % n]
        cross = ((cur[0] - prev[0]) * (nxt[1] - cur[1])
                 - (cur[1] - prev[1]) * (nxt[0] - cur[0]))
        if abs(cross) > 1e-9:
            out.append(cur)
    return out


def bounding_polygon(samples: CollisionSamples, inflate: float = 0.0) -> CollisionPolygon:
    """Minimal polygon with axis-parallel/slope-1 edges containing all samples.

    `inflate` expands the support values (one grid resolution in the
    pipeline) so discretization error stays on the safe side; the result is
    clipped back to the position domain.
    """
    if samples.empty:
        raise GeometryError("cannot bound an empty sample set")
    x = samples.points[:, 0]
    y = samples.points[:, 1]
    dom_i, dom_j = samples.domain
    x0 = max(0.0, float(x.min()) - inflate)
    x1 = min(dom_i, float(x.max()) + inflate)
    y0 = max(0.0, float(y.min()) - inflate)
    y1 = min(dom_j, float(y.max()) + inflate)
    d = x - y
    d0 = float(d.min()) - 2.0 * inflate
    d1 = float(d.max()) + 2.0 * inflate
    poly = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    poly = _clip_halfplane(poly, 1.0, -1.0, d1)    # x - y <= d1
    poly = _clip_halfplane(poly, -1.0, 1.0, -d0)   # x - y >= d0
    poly = _dedupe_collinear(poly)
    if len(poly) < 3:
        raise GeometryError("bounding polygon degenerated; sample set too thin")
    return CollisionPolygon(poly)


@dataclass
class ConflictZone:
    """Directed parameters of one completed collision-set component.

    All bounds describe the completion in which `robot_i` holds priority.
    The four perpendicular bounds describe the part of the completed set a
    waiting robot must stay out of; the parallel bounds describe the
    following regime along a shared stretch; `offset_aij` is the minimum
    lead (following distance plus abscissa offset) robot_i must keep.
    """

    robot_i: str
    robot_j: str
    polygon: CollisionPolygon | None
    s_par_lo_i: float
    s_par_hi_i: float
    s_par_lo_j: float
    s_par_hi_j: float
    s_perp_lo_i: float
    s_perp_hi_i: float
    s_perp_lo_j: float
    s_perp_hi_j: float
    offset_aij: float
    conflict_kind: str
    component: int = 0

    def __post_init__(self) -> None:
        bounds = (self.s_par_lo_i, self.s_par_hi_i, self.s_par_lo_j,
                  self.s_par_hi_j, self.s_perp_lo_i, self.s_perp_hi_i,
                  self.s_perp_lo_j, self.s_perp_hi_j)
        if any(b < -1e-9 for b in bounds):
            raise GeometryError("zone bounds must be nonnegative")
        if self.par_empty and self.perp_empty:
            raise GeometryError("conflict zone with both parts empty")
        if not self.par_empty and not (self.s_par_lo_i <= self.s_par_hi_i + 1e-9
                                       and self.s_par_lo_j <= self.s_par_hi_j + 1e-9):
            raise GeometryError("parallel bounds out of order")
        if not self.perp_empty and not (self.s_perp_lo_i <= self.s_perp_hi_i + 1e-9
                                        and self.s_perp_lo_j <= self.s_perp_hi_j + 1e-9):
            raise GeometryError("perpendicular bounds out of order")

    @property
    def par_empty(self) -> bool:
        return (self.s_par_lo_i == 0.0 and self.s_par_hi_i == 0.0
                and self.s_par_lo_j == 0.0 and self.s_par_hi_j == 0.0)

    @property
    def perp_empty(self) -> bool:
        return (self.s_perp_lo_i == 0.0 and self.s_perp_hi_i == 0.0
                and self.s_perp_lo_j == 0.0 and self.s_perp_hi_j == 0.0)

    @property
    def pair(self) -> tuple[str, str]:
        return tuple(sorted((self.robot_i, self.robot_j)))


def _transpose_polygon(polygon: CollisionPolygon) -> CollisionPolygon:
    verts = [(y, x) for x, y in reversed(polygon.vertices)]
    return CollisionPolygon(verts)


def _classify_edges(polygon: CollisionPolygon):
    """Locate the lower-right frontier edges: bottom horizontal, lower
    diagonal (slope 1) and right vertical."""
    bottom = diag = right = None
    for (x0, y0), (x1, y1) in polygon.edges():
        dx, dy = x1 - x0, y1 - y0
        norm = math.hypot(dx, dy)
        ux, uy = dx / norm, dy / norm
        if abs(uy) < _EDGE_TOL and ux > 0:          # outward normal (0, -1)
            bottom = (min(x0, x1), max(x0, x1), y0)
        elif abs(ux) < _EDGE_TOL and uy > 0:        # outward normal (1, 0)
            right = x0
        elif abs(ux - uy) < _EDGE_TOL and ux > 0:   # outward normal (1, -1)
            diag = (x0, y0, x1, y1)
    return bottom, diag, right


def decompose(polygon: CollisionPolygon, d_par: float,
              domain: tuple[float, float], direction: str = "i_over_j",
              robot_i: str = "i", robot_j: str = "j",
              component: int = 0) -> ConflictZone:
    """Derive priority-completion parameters for one direction.

    Completing the polygon with all configurations where the priority holder
    is further back yields a set whose lower-right frontier consists of at
    most one horizontal, one slope-1 and one vertical edge.  Horizontal
    pieces produce the perpendicular ("wait outside") part, the diagonal one
    the parallel ("follow at distance") part.  A horizontal piece lying on
    the domain floor next to a diagonal edge is shadowed by the follow
    condition and dropped, which makes full-length following bands come out
    as purely parallel.
    """
    if d_par < 0.0:
        raise GeometryError("following distance must be nonnegative")
    if direction == "j_over_i":
        zone = decompose(_transpose_polygon(polygon), d_par,
                         (domain[1], domain[0]), "i_over_j",
                         robot_i=robot_j, robot_j=robot_i, component=component)
        # Keep the polygon in the frame of the zone's own (i, j) roles.
        return zone
    if direction != "i_over_j":
        raise GeometryError(f"unknown direction {direction!r}")

    dom_i, dom_j = domain
    bottom, diag, right = _classify_edges(polygon)

    if bottom is not None and diag is not None and bottom[2] <= _DOMAIN_TOL:
        bottom = None  # domain-floor artifact of a clipped band

    par = diag is not None
    perp = bottom is not None
    if not par and not perp and right is None:
        raise GeometryError("polygon has no lower-right frontier to decompose")

    verts = np.asarray(polygon.vertices)
    poly_ymax = float(verts[:, 1].max())

    if par:
        dx0, dy0, dx1, dy1 = diag
        c = dx0 - dy0
        par_lo_i = dx0 if perp else 0.0
        par_hi_i = right if right is not None else dom_i
        par_lo_j = bottom[2] if perp else 0.0
        par_hi_j = min(dom_j, dy1)
        a_ij = d_par + c
    else:
        par_lo_i = par_hi_i = par_lo_j = par_hi_j = 0.0
        a_ij = 0.0

    if perp:
        bx0, bx1, by = bottom
        perp_lo_i = bx0
        perp_hi_i = diag[0] if par else (right if right is not None else dom_i)
        perp_lo_j = by
        perp_hi_j = poly_ymax
    else:
        perp_lo_i = perp_hi_i = perp_lo_j = perp_hi_j = 0.0

    if par and not perp:
        spans_all = par_lo_i <= _DOMAIN_TOL and par_hi_i >= dom_i - _DOMAIN_TOL
        kind = "following" if spans_all else "diverging"
    elif perp and not par:
        kind = "crossing"
    else:
        kind = "merging" if par_hi_i >= dom_i - _DOMAIN_TOL else "merge_diverge"

    return ConflictZone(
        robot_i=robot_i, robot_j=robot_j, polygon=polygon,
        s_par_lo_i=par_lo_i, s_par_hi_i=par_hi_i,
        s_par_lo_j=par_lo_j, s_par_hi_j=par_hi_j,
        s_perp_lo_i=perp_lo_i, s_perp_hi_i=perp_hi_i,
        s_perp_lo_j=perp_lo_j, s_perp_hi_j=perp_hi_j,
        offset_aij=a_ij, conflict_kind=kind, component=component,
    )


def conflict_zones(spec_i: RobotSpec, spec_j: RobotSpec, d_par: float,
                   resolution: float = 0.1) -> list[tuple[ConflictZone, ConflictZone]]:
    """Full pipeline for one robot pair: one (i>j, j>i) zone pair per
    connected collision-set component; empty list when non-conflicting."""
    samples = compute_collision_set(spec_i, spec_j, resolution)
    domain = (spec_i.s_out, spec_j.s_out)
    pairs = []
    for comp_idx, comp in enumerate(split_components(samples)):
        poly = bounding_polygon(comp, inflate=resolution)
        zij = decompose(poly, d_par, domain, "i_over_j",
                        robot_i=spec_i.id, robot_j=spec_j.id, component=comp_idx)
        zji = decompose(poly, d_par, domain, "j_over_i",
                        robot_i=spec_i.id, robot_j=spec_j.id, component=comp_idx)
        pairs.append((zij, zji))
    return pairs


def polygon_from_cuts(domain: tuple[float, float],
                      cuts: Sequence[tuple[float, float, float]]) -> CollisionPolygon:
    """Domain box intersected with halfplanes a*x + b*y <= c."""
    di, dj = domain
    poly = [(0.0, 0.0), (di, 0.0), (di, dj), (0.0, dj)]
    for a, b, c in cuts:
        poly = _clip_halfplane(poly, a, b, c)
    poly = _dedupe_collinear(poly)
    if len(poly) < 3:
        raise GeometryError("halfplane cuts left an empty or degenerate polygon")
    return CollisionPolygon(poly)


def samples_to_csv(samples: CollisionSamples) -> str:
    """CSV export of the raw sample set, one `s_i,s_j` row per sample."""
    buf = io.StringIO()
    buf.write("s_i,s_j\n")
    for x, y in samples.points:
        buf.write(f"{x:.6f},{y:.6f}\n")
    return buf.getvalue()
