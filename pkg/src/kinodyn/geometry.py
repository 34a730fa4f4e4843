"""2-D geometric primitives shared by the whole toolkit.

Points, poses, polygons (with optional holes), distance queries,
containment tests and boolean union.  All types are immutable and all
operations are pure functions, so everything here is safe to share
between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely
import shapely.geometry as _sgeom
import shapely.ops

TWO_PI = 2.0 * math.pi

# Coordinate snapping used to resolve near-degenerate boolean operations.
SNAP_TOL = 1e-9


class GeometryError(ValueError):
    """Raised for invalid geometric input or failed boolean operations."""


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    if not math.isfinite(theta):
        raise GeometryError(f"non-finite angle: {theta}")
    return math.pi - (math.pi - theta) % TWO_PI


@dataclass(frozen=True)
class Point2:
    """A point in the plane, coordinates in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite point ({self.x}, {self.y})")

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class Pose:
    """Position plus heading, heading normalized to (-pi, pi]."""

    position: Point2
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @classmethod
    def of(cls, x: float, y: float, heading: float) -> "Pose":
        return cls(Point2(x, y), heading)

    @property
    def x(self) -> float:
        return self.position.x

    @property
    def y(self) -> float:
        return self.position.y


@dataclass(frozen=True)
class SizedPoint:
    """An obstacle point with a physical extent (a disc)."""

    center: Point2
    radius: float

    def __post_init__(self):
        if not math.isfinite(self.radius) or self.radius < 0.0:
            raise GeometryError(f"invalid obstacle radius {self.radius}")


def _ring_array(vertices) -> np.ndarray:
    arr = np.asarray([(v.x, v.y) if isinstance(v, Point2) else tuple(v) for v in vertices], dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GeometryError("ring vertices must be a sequence of 2-D points")
    return arr


def _signed_area(arr: np.ndarray) -> float:
    x, y = arr[:, 0], arr[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass(frozen=True)
class Polygon:
    """A simple polygon given as a CCW vertex ring, implicitly closed.

    ``holes`` is an artifact extension: boolean unions of scan polygons can
    enclose pockets of blocked space, which are kept as interior rings so
    that containment and distance queries stay exact.  Most polygons in
    practice have no holes.
    """

    vertices: tuple
    holes: tuple = ()

    def __post_init__(self):
        verts = tuple(v if isinstance(v, Point2) else Point2(v[0], v[1]) for v in self.vertices)
        holes = tuple(
            tuple(v if isinstance(v, Point2) else Point2(v[0], v[1]) for v in ring) for ring in self.holes
        )
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "holes", holes)
        for ring in (verts,) + holes:
            if len(ring) < 3:
                raise GeometryError("polygon ring needs at least 3 vertices")
            arr = _ring_array(ring)
            if np.any(np.all(arr == np.roll(arr, -1, axis=0), axis=1)):
                raise GeometryError("consecutive duplicate vertices")
        # Normalize every ring to CCW storage order.
        if _signed_area(_ring_array(verts)) < 0.0:
            object.__setattr__(self, "vertices", verts[::-1])
        fixed_holes = []
        for ring in holes:
            if _signed_area(_ring_array(ring)) < 0.0:
                ring = ring[::-1]
            fixed_holes.append(ring)
        object.__setattr__(self, "holes", tuple(fixed_holes))
        if not self.to_shapely().is_valid:
            raise GeometryError("polygon is not simple")

    # -- cached derived data ------------------------------------------------

    @property
    def _rings(self) -> list:
        return [self.vertices] + list(self.holes)

    def ring_arrays(self) -> list:
        cached = getattr(self, "_ring_arrays_cache", None)
        if cached is None:
            cached = [_ring_array(ring) for ring in self._rings]
            object.__setattr__(self, "_ring_arrays_cache", cached)
        return cached

    def edge_arrays(self):
        """All boundary edges of all rings as (starts, ends) arrays."""
        cached = getattr(self, "_edge_arrays_cache", None)
        if cached is None:
            starts, ends = [], []
            for arr in self.ring_arrays():
                starts.append(arr)
                ends.append(np.roll(arr, -1, axis=0))
            cached = (np.vstack(starts), np.vstack(ends))
            object.__setattr__(self, "_edge_arrays_cache", cached)
        return cached

    def to_shapely(self) -> _sgeom.Polygon:
        cached = getattr(self, "_shapely_cache", None)
        if cached is None:
            cached = _sgeom.Polygon(
                [(v.x, v.y) for v in self.vertices],
                [[(v.x, v.y) for v in ring] for ring in self.holes],
            )
            object.__setattr__(self, "_shapely_cache", cached)
        return cached

    @property
    def area(self) -> float:
        outer = _signed_area(self.ring_arrays()[0])
        inner = sum(abs(_signed_area(a)) for a in self.ring_arrays()[1:])
        return abs(outer) - inner

    def bounds(self):
        arr = self.ring_arrays()[0]
        return float(arr[:, 0].min()), float(arr[:, 1].min()), float(arr[:, 0].max()), float(arr[:, 1].max())

    @classmethod
    def from_shapely(cls, geom: _sgeom.Polygon) -> "Polygon":
        outer = list(geom.exterior.coords)[:-1]
        holes = [list(ring.coords)[:-1] for ring in geom.interiors]
        return cls(tuple(outer), tuple(tuple(h) for h in holes))


@dataclass(frozen=True)
class MultiPolygon:
    """A collection of polygons with pairwise disjoint interiors."""

    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def area(self) -> float:
        return sum(c.area for c in self.components)


# -- distance kernels -------------------------------------------------------


def segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    """Distance from ``p`` to the closed segment [a, b] (degenerate ok)."""
    return float(
        segment_distances_batch(
            np.array([[p.x, p.y]]), np.array([[a.x, a.y]]), np.array([[b.x, b.y]])
        )[0]
    )


def segment_distances_batch(points: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray) -> np.ndarray:
    """Min distance from each of N points to the nearest of M segments.

    points: (N, 2); seg_a, seg_b: (M, 2).  Returns (N,).
    """
    d = seg_b - seg_a  # (M, 2)
    len2 = np.einsum("ij,ij->i", d, d)  # (M,)
    rel = points[:, None, :] - seg_a[None, :, :]  # (N, M, 2)
    t = np.einsum("nmi,mi->nm", rel, d)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(len2 > 0.0, t / len2, 0.0)
    t = np.clip(t, 0.0, 1.0)
    foot = seg_a[None, :, :] + t[:, :, None] * d[None, :, :]
    diff = points[:, None, :] - foot
    return np.sqrt(np.einsum("nmi,nmi->nm", diff, diff)).min(axis=1)


def _rings_crossing_parity(points: np.ndarray, rings) -> np.ndarray:
    """Even-odd crossing parity of N points against a list of ring arrays."""
    inside = np.zeros(len(points), dtype=bool)
    px, py = points[:, 0], points[:, 1]
    for arr in rings:
        x1, y1 = arr[:, 0], arr[:, 1]
        x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
        cond = (y1[None, :] > py[:, None]) != (y2[None, :] > py[:, None])
        with np.errstate(invalid="ignore", divide="ignore"):
            xint = x1[None, :] + (py[:, None] - y1[None, :]) / (y2 - y1)[None, :] * (x2 - x1)[None, :]
        crossings = cond & (px[:, None] < xint)
        inside ^= crossings.sum(axis=1) % 2 == 1
    return inside


def points_in_polygon(points: np.ndarray, poly: Polygon, boundary_tol: float = 1e-12) -> np.ndarray:
    """Vectorized closed-region containment test for an (N, 2) array."""
    points = np.asarray(points, dtype=float)
    inside = _rings_crossing_parity(points, poly.ring_arrays())
    # The region is closed: points on any ring count as inside.
    ambiguous = ~inside
    if np.any(ambiguous):
        seg_a, seg_b = poly.edge_arrays()
        d = segment_distances_batch(points[ambiguous], seg_a, seg_b)
        inside[np.flatnonzero(ambiguous)[d <= boundary_tol]] = True
    return inside


def point_in_polygon(p: Point2, poly: Polygon) -> bool:
    """True iff ``p`` lies in the closed region bounded by ``poly``."""
    return bool(points_in_polygon(np.array([[p.x, p.y]]), poly)[0])


def distance_to_boundary(p: Point2, poly: Polygon) -> float:
    """Minimum Euclidean distance from ``p`` to the polygon boundary."""
    seg_a, seg_b = poly.edge_arrays()
    return float(segment_distances_batch(np.array([[p.x, p.y]]), seg_a, seg_b)[0])


def signed_distance(p: Point2, poly: Polygon) -> float:
    """Distance to the boundary, positive inside the region, negative outside."""
    d = distance_to_boundary(p, poly)
    return d if point_in_polygon(p, poly) else -d


def signed_distances_batch(points: np.ndarray, poly: Polygon) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    seg_a, seg_b = poly.edge_arrays()
    d = segment_distances_batch(points, seg_a, seg_b)
    inside = points_in_polygon(points, poly)
    return np.where(inside, d, -d)


# -- boolean union ----------------------------------------------------------


def _clean_ring(coords) -> list:
    out = []
    for c in coords:
        if out and abs(c[0] - out[-1][0]) < SNAP_TOL and abs(c[1] - out[-1][1]) < SNAP_TOL:
            continue
        out.append((float(c[0]), float(c[1])))
    if len(out) > 1 and abs(out[0][0] - out[-1][0]) < SNAP_TOL and abs(out[0][1] - out[-1][1]) < SNAP_TOL:
        out.pop()
    return out


def _from_shapely_area(geom) -> MultiPolygon:
    parts = []
    if geom.is_empty:
        return MultiPolygon(())
    if isinstance(geom, _sgeom.Polygon):
        geoms = [geom]
    elif isinstance(geom, _sgeom.MultiPolygon):
        geoms = list(geom.geoms)
    elif isinstance(geom, _sgeom.GeometryCollection):
        geoms = [g for g in geom.geoms if isinstance(g, _sgeom.Polygon)]
    else:
        raise GeometryError(f"unexpected union result type {geom.geom_type}")
    for g in geoms:
        outer = _clean_ring(g.exterior.coords)
        if len(outer) < 3:
            continue
        holes = []
        for ring in g.interiors:
            cleaned = _clean_ring(ring.coords)
            if len(cleaned) >= 3:
                holes.append(tuple(cleaned))
        parts.append(Polygon(tuple(outer), tuple(holes)))
    return MultiPolygon(tuple(parts))


def union(polys) -> MultiPolygon:
    """Boolean union of simple polygons.

    Near-degenerate intersections are resolved by snapping coordinates to a
    1e-9 m grid; configurations the clipper still cannot resolve raise
    GeometryError instead of returning broken geometry.
    """
    shapes = []
    for p in polys:
        s = p.to_shapely()
        if not s.is_valid:
            raise GeometryError("invalid input polygon for union")
        shapes.append(shapely.set_precision(s, SNAP_TOL))
    if not shapes:
        return MultiPolygon(())
    try:
        merged = shapely.union_all(shapes)
    except shapely.errors.GEOSException as exc:  # pragma: no cover - GEOS internal failure
        raise GeometryError(f"polygon union failed: {exc}") from exc
    if not merged.is_valid:
        raise GeometryError("polygon union produced invalid geometry")
    return _from_shapely_area(merged)
