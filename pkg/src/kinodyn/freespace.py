"""Automated free-space polygon generation from obstacle point clouds.

The drivable region is grown iteratively: circular-sector scans around
viewpoints produce star-shaped polygons, their union is the current free
space, and new viewpoints are picked as clearance-filtered local maximizers
of a potential that rewards distance from both the polygon border and the
already-used viewpoints.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    GeometryError,
    MultiPolygon,
    Point2,
    Polygon,
    Pose,
    point_in_polygon,
    points_in_polygon,
    segment_distances_batch,
    union,
)
from .parallel import parallel_map

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObstacleCloud:
    """Static environment as a cloud of sized points."""

    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    @classmethod
    def from_arrays(cls, xyr: np.ndarray) -> "ObstacleCloud":
        return cls(tuple(SizedPointView(row[0], row[1], row[2]) for row in np.asarray(xyr)))

    def arrays(self):
        cached = getattr(self, "_arrays_cache", None)
        if cached is None:
            if self.points:
                centers = np.array([[p.center.x, p.center.y] for p in self.points])
                radii = np.array([p.radius for p in self.points])
            else:
                centers = np.zeros((0, 2))
                radii = np.zeros(0)
            cached = (centers, radii)
            object.__setattr__(self, "_arrays_cache", cached)
        return cached

    def __len__(self):
        return len(self.points)


def SizedPointView(x, y, r):
    from .geometry import SizedPoint

    return SizedPoint(Point2(float(x), float(y)), float(r))


@dataclass(frozen=True)
class PolygonGenConfig:
    """Parameters of the polygon growth algorithm."""

    refinements: int = 2
    clearance: float = 10.0
    expansion: float = 20.0
    sector_count: int = 72
    grid_step: float = 0.5

    def __post_init__(self):
        if self.refinements < 0:
            raise ValueError("refinements must be >= 0")
        if self.clearance <= 0 or self.expansion <= 0:
            raise ValueError("clearance and expansion must be positive")
        if self.sector_count < 8:
            raise ValueError("sector_count must be >= 8")


@dataclass(frozen=True)
class ViewpointSet:
    current: tuple
    used: tuple


@dataclass(frozen=True)
class PolygonStage:
    """Snapshot of one growth round."""

    polygon: Polygon
    viewpoints: ViewpointSet


class ViewpointInsideObstacle(GeometryError):
    pass


def _wrap(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def generate_sector_polygon(viewpoint: Point2, cloud: ObstacleCloud, cfg: PolygonGenConfig) -> Polygon:
    """Star-shaped scan polygon around one viewpoint.

    The circle around the viewpoint is split into ``sector_count`` sectors
    (the grid is centered so that due east is a sector midline).  Every
    obstacle disc is assigned to each sector its angular extent touches; a
    sector's vertex is the closest disc point reachable inside that sector,
    or the midline point at the expansion radius if the sector is empty.
    """
    n = cfg.sector_count
    width = 2.0 * math.pi / n
    centers, radii = cloud.arrays()

    # candidate per sector: (distance, angle)
    dist = np.full(n, cfg.expansion)
    angle = -math.pi + (np.arange(n) + 1.0) * width  # midlines
    has_vertex = np.zeros(n, dtype=bool)

    if len(centers):
        rel = centers - np.array([viewpoint.x, viewpoint.y])
        d = np.hypot(rel[:, 0], rel[:, 1])
        if np.any(d <= radii):
            raise ViewpointInsideObstacle(
                f"viewpoint ({viewpoint.x:.2f}, {viewpoint.y:.2f}) lies inside an obstacle disc"
            )
        near = d - radii <= cfg.expansion
        for dx, dy, dd, rr in zip(rel[near, 0], rel[near, 1], d[near], radii[near]):
            phi = math.atan2(dy, dx)
            delta = math.asin(min(1.0, rr / dd))
            # sector index containing phi; boundaries at -pi + (i + 0.5) * width
            i_centre = int(math.floor((phi + math.pi) / width + 0.5)) % n
            closest = dd - rr
            if closest < dist[i_centre]:
                dist[i_centre] = closest
                angle[i_centre] = phi
                has_vertex[i_centre] = True
            # neighbors whose edge rays still intersect the disc
            span = int(math.ceil((delta + 0.5 * width) / width)) + 1
            for off in range(1, span + 1):
                for i in (i_centre - off, i_centre + off):
                    idx = i % n
                    lo = -math.pi + (idx + 0.5) * width - width  # lower boundary
                    hi = lo + width
                    b_lo = abs(_wrap(phi - lo))
                    b_hi = abs(_wrap(phi - hi))
                    b = min(b_lo, b_hi)
                    edge = lo if b_lo < b_hi else hi
                    if b >= delta or b == 0.0:
                        continue
                    entry = dd * math.cos(b) - math.sqrt(max(0.0, rr * rr - (dd * math.sin(b)) ** 2))
                    if entry < dist[idx]:
                        dist[idx] = entry
                        angle[idx] = edge
                        has_vertex[idx] = True

    dist = np.minimum(dist, cfg.expansion)
    xs = viewpoint.x + dist * np.cos(angle)
    ys = viewpoint.y + dist * np.sin(angle)
    verts = []
    for x, y in zip(xs, ys):
        if verts and abs(x - verts[-1][0]) < 1e-12 and abs(y - verts[-1][1]) < 1e-12:
            continue
        verts.append((x, y))
    if len(verts) > 1 and abs(verts[0][0] - verts[-1][0]) < 1e-12 and abs(verts[0][1] - verts[-1][1]) < 1e-12:
        verts.pop()
    return Polygon(tuple(verts))


def viewpoint_potential(p: Point2, poly: Polygon, used) -> float:
    """Potential whose local maximizers are candidate viewpoints; < 0 inside,
    -inf outside the polygon."""
    if not point_in_polygon(p, poly):
        return -math.inf
    seg_a, seg_b = poly.edge_arrays()
    d_border = float(segment_distances_batch(np.array([[p.x, p.y]]), seg_a, seg_b)[0])
    value = -1.0 / (1.0 + d_border)
    for v in used:
        value -= 1.0 / (1.0 + math.hypot(v.x - p.x, v.y - p.y))
    return value


def _potential_grid(poly: Polygon, used, step: float):
    x0, y0, x1, y1 = poly.bounds()
    xs = np.arange(x0 + step / 2.0, x1, step)
    ys = np.arange(y0 + step / 2.0, y1, step)
    if len(xs) == 0 or len(ys) == 0:
        return None
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    inside = points_in_polygon(pts, poly)
    g = np.full(pts.shape[0], -np.inf)
    if np.any(inside):
        seg_a, seg_b = poly.edge_arrays()
        d_border = segment_distances_batch(pts[inside], seg_a, seg_b)
        val = -1.0 / (1.0 + d_border)
        for v in used:
            val -= 1.0 / (1.0 + np.hypot(pts[inside, 0] - v.x, pts[inside, 1] - v.y))
        g[inside] = val
    return pts, g.reshape(gx.shape), d_border_full(pts, inside, poly)


def d_border_full(pts, inside, poly):
    d = np.zeros(len(pts))
    if np.any(inside):
        seg_a, seg_b = poly.edge_arrays()
        d[inside] = segment_distances_batch(pts[inside], seg_a, seg_b)
    return d


def find_viewpoints(poly: Polygon, used, cfg: PolygonGenConfig):
    """Clearance-filtered local maximizers of the viewpoint potential.

    The potential is evaluated on a uniform grid over the polygon bounding
    box; strict 8-neighborhood maxima are candidates.  Candidates violating
    the clearance (too close to each other or to a used viewpoint) are
    removed worst-potential first.
    """
    grid = _potential_grid(poly, used, cfg.grid_step)
    if grid is None:
        return []
    pts, g, d_border = grid
    nx, ny = g.shape
    padded = np.full((nx + 2, ny + 2), -np.inf)
    padded[1:-1, 1:-1] = g
    center = padded[1:-1, 1:-1]
    is_max = np.isfinite(center)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            is_max &= center > padded[1 + di : 1 + di + nx, 1 + dj : 1 + dj + ny]
    flat_idx = np.flatnonzero(is_max.ravel())
    if len(flat_idx) == 0:
        return []

    cand = [
        (float(g.ravel()[i]), float(d_border[i]), float(pts[i, 0]), float(pts[i, 1])) for i in flat_idx
    ]
    # removal order: lowest potential first, then smaller border distance,
    # then larger (x, y), so that survivors are deterministic
    cand.sort(key=lambda c: (c[0], c[1], -c[2], -c[3]))
    alive = [True] * len(cand)
    used_xy = [(v.x, v.y) for v in used]

    def violations():
        out = []
        for i, c in enumerate(cand):
            if not alive[i]:
                continue
            too_close = any(
                math.hypot(c[2] - x, c[3] - y) < cfg.clearance for x, y in used_xy
            ) or any(
                alive[j] and j != i and math.hypot(c[2] - cand[j][2], c[3] - cand[j][3]) < cfg.clearance
                for j in range(len(cand))
            )
            if too_close:
                out.append(i)
        return out

    bad = violations()
    while bad:
        alive[bad[0]] = False
        bad = violations()
    return [Point2(c[2], c[3]) for i, c in enumerate(cand) if alive[i]]


def _ego_component(parts: MultiPolygon, start: Point2) -> Polygon:
    for comp in parts.components:
        if point_in_polygon(start, comp):
            return comp
    # numeric fallback: nearest component
    best, best_d = None, math.inf
    for comp in parts.components:
        seg_a, seg_b = comp.edge_arrays()
        d = float(segment_distances_batch(np.array([[start.x, start.y]]), seg_a, seg_b)[0])
        if d < best_d:
            best, best_d = comp, d
    if best is None:
        raise GeometryError("union produced no polygon components")
    return best


def create_polygon(start: Pose, cloud: ObstacleCloud, cfg: PolygonGenConfig) -> Polygon:
    """Run the full iterative growth and return the final free-space polygon."""
    return create_polygon_stages(start, cloud, cfg)[-1].polygon


def create_polygon_stages(start: Pose, cloud: ObstacleCloud, cfg: PolygonGenConfig):
    """Iterative growth keeping one snapshot per round (for plots and tests)."""
    centers, radii = cloud.arrays()
    s0 = start.position
    if len(centers):
        d = np.hypot(centers[:, 0] - s0.x, centers[:, 1] - s0.y)
        if np.any(d <= radii):
            raise ViewpointInsideObstacle("start position lies inside an obstacle disc")

    stages = []
    current = [s0]
    used: list = []
    poly: Polygon | None = None
    for k in range(cfg.refinements + 1):
        scans = []
        for v in current:
            try:
                scans.append(generate_sector_polygon(v, cloud, cfg))
            except ViewpointInsideObstacle:
                log.warning("skipping viewpoint (%.2f, %.2f): inside an obstacle", v.x, v.y)
        pieces = ([poly] if poly is not None else []) + scans
        if not pieces:
            raise GeometryError("no valid viewpoints in round %d" % k)
        merged = union(pieces)
        poly = _ego_component(merged, s0)
        used = used + current
        stages.append(
            PolygonStage(polygon=poly, viewpoints=ViewpointSet(tuple(current), tuple(used)))
        )
        if k != cfg.refinements:
            current = find_viewpoints(poly, used, cfg)
            if not current:
                # nothing left to expand from; later rounds would be no-ops
                current = []
        if not current and k != cfg.refinements:
            # keep the remaining rounds as snapshots of the unchanged polygon
            for _ in range(k + 1, cfg.refinements + 1):
                stages.append(PolygonStage(polygon=poly, viewpoints=ViewpointSet((), tuple(used))))
            break
    if not point_in_polygon(s0, stages[-1].polygon):
        raise GeometryError("start position not contained in the generated polygon")
    return stages
