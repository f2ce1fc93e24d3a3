import pytest

from netqa.errors import GeometryError
from netqa.geometry import Point2D, Polyline
from netqa.polygons import (
    PolygonArea,
    clip_polyline_to_polygon,
    point_in_rings,
    ring_intersects_polygon,
    ring_signed_area,
)

from conftest import rect_polygon


def line(*coords):
    return Polyline(tuple(Point2D(float(x), float(y)) for x, y in coords))


def test_square_area():
    assert rect_polygon(0, 0, 10, 10).area == 100.0


def test_area_with_hole():
    outer = (Point2D(0, 0), Point2D(10, 0), Point2D(10, 10), Point2D(0, 10))
    hole = (Point2D(3, 3), Point2D(7, 3), Point2D(7, 7), Point2D(3, 7))
    poly = PolygonArea(rings=(outer, hole))
    assert poly.area == 100.0 - 16.0


def test_degenerate_polygon_rejected():
    with pytest.raises(GeometryError):
        PolygonArea(rings=((Point2D(0, 0), Point2D(1, 0), Point2D(2, 0)),))


def test_point_in_rings_with_hole():
    outer = (Point2D(0, 0), Point2D(10, 0), Point2D(10, 10), Point2D(0, 10))
    hole = (Point2D(3, 3), Point2D(7, 3), Point2D(7, 7), Point2D(3, 7))
    rings = (outer, hole)
    assert point_in_rings(1, 1, rings)
    assert not point_in_rings(5, 5, rings)  # inside the hole
    assert not point_in_rings(11, 5, rings)


def test_clip_full_crossing():
    poly = rect_polygon(0, 0, 10, 10)
    assert abs(clip_polyline_to_polygon(line((-5, 5), (15, 5)), poly) - 10.0) < 1e-9


def test_clip_outside():
    poly = rect_polygon(0, 0, 10, 10)
    assert clip_polyline_to_polygon(line((0, 20), (10, 20)), poly) == 0.0


def test_clip_half_inside():
    poly = rect_polygon(0, 0, 10, 10)
    assert abs(clip_polyline_to_polygon(line((5, 5), (5, 15)), poly) - 5.0) < 1e-9


def test_clip_respects_holes():
    outer = (Point2D(0, 0), Point2D(10, 0), Point2D(10, 10), Point2D(0, 10))
    hole = (Point2D(4, 4), Point2D(6, 4), Point2D(6, 6), Point2D(4, 6))
    poly = PolygonArea(rings=(outer, hole))
    # crosses the square and the hole: 10 total, minus 2 inside the hole
    assert abs(clip_polyline_to_polygon(line((-1, 5), (11, 5)), poly) - 8.0) < 1e-9


def test_ring_intersects_polygon_cases():
    poly = rect_polygon(0, 0, 10, 10)
    inside_ring = (Point2D(2, 2), Point2D(4, 2), Point2D(4, 4), Point2D(2, 4))
    outside_ring = (Point2D(20, 20), Point2D(22, 20), Point2D(22, 22), Point2D(20, 22))
    crossing_ring = (Point2D(8, 8), Point2D(14, 8), Point2D(14, 12), Point2D(8, 12))
    containing_ring = (Point2D(-5, -5), Point2D(15, -5), Point2D(15, 15), Point2D(-5, 15))
    assert ring_intersects_polygon(inside_ring, poly)
    assert not ring_intersects_polygon(outside_ring, poly)
    assert ring_intersects_polygon(crossing_ring, poly)
    assert ring_intersects_polygon(containing_ring, poly)


def test_ring_inside_hole_does_not_intersect():
    outer = (Point2D(0, 0), Point2D(20, 0), Point2D(20, 20), Point2D(0, 20))
    hole = (Point2D(5, 5), Point2D(15, 5), Point2D(15, 15), Point2D(5, 15))
    poly = PolygonArea(rings=(outer, hole))
    ring_in_hole = (Point2D(9, 9), Point2D(11, 9), Point2D(11, 11), Point2D(9, 11))
    assert not ring_intersects_polygon(ring_in_hole, poly)


def test_signed_area_orientation():
    ccw = (Point2D(0, 0), Point2D(1, 0), Point2D(1, 1))
    cw = tuple(reversed(ccw))
    assert ring_signed_area(ccw) == 0.5
    assert ring_signed_area(cw) == -0.5
