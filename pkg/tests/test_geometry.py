import math

import numpy as np
import pytest

from kinodyn.geometry import (
    GeometryError,
    MultiPolygon,
    Point2,
    Polygon,
    Pose,
    distance_to_boundary,
    normalize_angle,
    point_in_polygon,
    points_in_polygon,
    segment_distance,
    signed_distance,
    union,
)

from oracles import point_in_ring_crossing, rasterized_area


def square(side=1.0, x0=0.0, y0=0.0):
    return Polygon(((x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)))


def random_star_polygon(rng, n=None, r_lo=0.5, r_hi=3.0, cx=0.0, cy=0.0):
    n = n or rng.integers(4, 12)
    while True:
        angles = np.sort(rng.uniform(0, 2 * math.pi, n))
        gaps = np.diff(angles, append=angles[0] + 2 * math.pi)
        if np.min(gaps) > 1e-3 and np.max(gaps) < 2.8:
            break
    radii = rng.uniform(r_lo, r_hi, n)
    pts = [(cx + r * math.cos(a), cy + r * math.sin(a)) for r, a in zip(radii, angles)]
    return Polygon(tuple(pts))


class TestAngles:
    def test_normalize_range(self):
        for theta in np.linspace(-20, 20, 1001):
            w = normalize_angle(theta)
            assert -math.pi < w <= math.pi
            assert abs(math.sin(w - theta)) < 1e-12

    def test_pi_maps_to_pi(self):
        assert normalize_angle(math.pi) == pytest.approx(math.pi)
        assert normalize_angle(-math.pi) == pytest.approx(math.pi)


class TestTypes:
    def test_point_rejects_nan(self):
        with pytest.raises(GeometryError):
            Point2(float("nan"), 0.0)

    def test_pose_normalizes_heading(self):
        p = Pose.of(0, 0, 3 * math.pi)
        assert p.heading == pytest.approx(math.pi)

    def test_polygon_needs_three_vertices(self):
        with pytest.raises(GeometryError):
            Polygon(((0, 0), (1, 0)))

    def test_polygon_rejects_duplicates(self):
        with pytest.raises(GeometryError):
            Polygon(((0, 0), (0, 0), (1, 0), (1, 1)))

    def test_polygon_rejects_self_intersection(self):
        with pytest.raises(GeometryError):
            Polygon(((0, 0), (1, 1), (1, 0), (0, 1)))

    def test_cw_input_normalized_to_ccw(self):
        p = Polygon(((0, 0), (0, 1), (1, 1), (1, 0)))
        assert p.area == pytest.approx(1.0)
        arr = p.ring_arrays()[0]
        twice_area = np.sum(arr[:, 0] * np.roll(arr[:, 1], -1) - np.roll(arr[:, 0], -1) * arr[:, 1])
        assert twice_area > 0


class TestSegmentDistance:
    def test_foot_inside(self):
        assert segment_distance(Point2(0, 1), Point2(-1, 0), Point2(1, 0)) == pytest.approx(1.0)

    def test_clamped_to_endpoint(self):
        assert segment_distance(Point2(2, 0), Point2(-1, 0), Point2(1, 0)) == pytest.approx(1.0)

    def test_degenerate_segment(self):
        assert segment_distance(Point2(0, 0), Point2(0, 0), Point2(0, 0)) == 0.0
        assert segment_distance(Point2(3, 4), Point2(0, 0), Point2(0, 0)) == pytest.approx(5.0)


class TestContainment:
    def test_interior(self):
        assert point_in_polygon(Point2(0.5, 0.5), square())

    def test_outside(self):
        assert not point_in_polygon(Point2(2.0, 0.0), square())

    def test_boundary_counts_as_inside(self):
        assert point_in_polygon(Point2(1.0, 0.5), square())
        assert point_in_polygon(Point2(0.0, 0.0), square())

    def test_hole_is_outside(self):
        poly = Polygon(
            ((0, 0), (10, 0), (10, 10), (0, 10)),
            holes=(((4, 4), (6, 4), (6, 6), (4, 6)),),
        )
        assert point_in_polygon(Point2(1, 1), poly)
        assert not point_in_polygon(Point2(5, 5), poly)
        # hole boundary belongs to the closed region
        assert point_in_polygon(Point2(4, 5), poly)

    def test_agrees_with_crossing_oracle(self):
        rng = np.random.default_rng(42)
        n_checked = 0
        while n_checked < 100_000:
            poly = random_star_polygon(rng)
            ring = [(v.x, v.y) for v in poly.vertices]
            pts = rng.uniform(-4, 4, size=(512, 2))
            seg_a, seg_b = poly.edge_arrays()
            from kinodyn.geometry import segment_distances_batch

            d = segment_distances_batch(pts, seg_a, seg_b)
            keep = d > 1e-6
            got = points_in_polygon(pts[keep], poly)
            want = np.array([point_in_ring_crossing(x, y, ring) for x, y in pts[keep]])
            assert np.array_equal(got, want)
            n_checked += int(keep.sum())


class TestDistanceToBoundary:
    def test_square_center(self):
        assert distance_to_boundary(Point2(0.5, 0.5), square()) == pytest.approx(0.5)

    def test_vertex_on_boundary(self):
        assert distance_to_boundary(Point2(0, 0), square()) == 0.0

    def test_rectangle_nearest_long_edge(self):
        rect = Polygon(((0, 0), (4, 0), (4, 2), (0, 2)))
        assert distance_to_boundary(Point2(1, 1), rect) == pytest.approx(1.0)

    def test_zero_iff_on_boundary(self):
        rng = np.random.default_rng(7)
        poly = random_star_polygon(rng)
        seg_a, seg_b = poly.edge_arrays()
        # points on randomly chosen edges
        for _ in range(200):
            i = rng.integers(len(seg_a))
            t = rng.uniform()
            p = Point2(*(seg_a[i] * (1 - t) + seg_b[i] * t))
            assert distance_to_boundary(p, poly) < 1e-9
        # points off the boundary
        for _ in range(200):
            p = Point2(*rng.uniform(-4, 4, 2))
            d = distance_to_boundary(p, poly)
            if d > 1e-9:
                assert d > 0

    def test_signed_distance(self):
        sq = square(10.0)
        assert signed_distance(Point2(5, 5), sq) == pytest.approx(5.0)
        assert signed_distance(Point2(-1, 5), sq) == pytest.approx(-1.0)


class TestUnion:
    def test_idempotent(self):
        sq = square()
        result = union([sq, sq])
        assert len(result.components) == 1
        assert result.area == pytest.approx(1.0, abs=1e-9)

    def test_disjoint(self):
        a, b = square(), square(x0=5.0)
        result = union([a, b])
        assert len(result.components) == 2
        assert result.area == pytest.approx(2.0, abs=1e-9)

    def test_overlapping_squares_area(self):
        a, b = square(), square(x0=0.5)
        result = union([a, b])
        assert len(result.components) == 1
        oracle = rasterized_area(
            [[[(v.x, v.y) for v in p.vertices]] for p in (a, b)], cell=0.001
        )
        assert result.area == pytest.approx(1.5, abs=1e-9)
        assert result.area == pytest.approx(oracle, rel=5e-3)

    def test_commutative(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a = random_star_polygon(rng, cx=rng.uniform(-1, 1))
            b = random_star_polygon(rng, cx=rng.uniform(-1, 1))
            ab = union([a, b])
            ba = union([b, a])
            assert ab.area == pytest.approx(ba.area, abs=1e-6)

    def test_interior_vertices_absent(self):
        big = square(10.0)
        small = square(1.0, x0=4.0, y0=4.0)
        result = union([big, small])
        assert len(result.components) == 1
        verts = {(v.x, v.y) for v in result.components[0].vertices}
        for v in small.vertices:
            assert (v.x, v.y) not in verts

    def test_inclusion_exclusion_against_raster(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            a = random_star_polygon(rng, cx=rng.uniform(-1.5, 1.5), cy=rng.uniform(-1.5, 1.5))
            b = random_star_polygon(rng, cx=rng.uniform(-1.5, 1.5), cy=rng.uniform(-1.5, 1.5))
            got = union([a, b]).area
            # snapping to the 1e-9 grid moves areas by O(perimeter * 1e-9)
            assert got <= a.area + b.area + 1e-7
            assert got >= max(a.area, b.area) - 1e-7

    def test_area_matches_raster_oracle_sampled(self):
        # Full rasterization is expensive, so the pixel-level comparison runs
        # on a subsample while the inclusion bounds above cover all pairs.
        rng = np.random.default_rng(12)
        for _ in range(25):
            a = random_star_polygon(rng, cx=rng.uniform(-1, 1))
            b = random_star_polygon(rng, cx=rng.uniform(-1, 1))
            got = union([a, b]).area
            oracle = rasterized_area(
                [[[(v.x, v.y) for v in p.vertices]] for p in (a, b)], cell=0.004
            )
            assert got == pytest.approx(oracle, rel=1e-3, abs=2e-2)

    def test_empty_input(self):
        assert union([]).components == ()
