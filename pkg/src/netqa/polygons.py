"""Ring-based polygon math: areas, containment, and line clipping.

Polygons are stored as open rings (no repeated closing vertex): one outer
ring plus optional holes. Containment uses even-odd ray casting over all
rings, so holes fall out naturally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import GeometryError
from .geometry import Point2D, Polyline

__all__ = [
    "PolygonArea",
    "ring_signed_area",
    "point_in_rings",
    "clip_polyline_to_polygon",
    "ring_intersects_polygon",
]

_PARAM_EPS = 1e-12


@dataclass(frozen=True)
class PolygonArea:
    """A named polygon: outer ring first, then any holes."""

    rings: tuple[tuple[Point2D, ...], ...]
    name: str = ""

    def __post_init__(self):
        if not self.rings:
            raise GeometryError("polygon needs at least an outer ring")
        for ring in self.rings:
            if len(ring) < 3:
                raise GeometryError(f"polygon ring with fewer than 3 vertices ({self.name!r})")
        if self.area <= 0:
            raise GeometryError(f"degenerate polygon with nonpositive area ({self.name!r})")

    @property
    def area(self) -> float:
        outer = abs(ring_signed_area(self.rings[0]))
        holes = sum(abs(ring_signed_area(r)) for r in self.rings[1:])
        return outer - holes

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        xs = [v.x for v in self.rings[0]]
        ys = [v.y for v in self.rings[0]]
        return min(xs), min(ys), max(xs), max(ys)

    def contains(self, x: float, y: float) -> bool:
        return point_in_rings(x, y, self.rings)


def ring_signed_area(ring) -> float:
    """Shoelace area of an open ring; positive for counterclockwise order."""
    total = 0.0
    n = len(ring)
    for i in range(n):
        a = ring[i]
        b = ring[(i + 1) % n]
        total += a.x * b.y - b.x * a.y
    return total / 2.0


def point_in_rings(x: float, y: float, rings) -> bool:
    """Even-odd containment test across every ring."""
    inside = False
    for ring in rings:
        n = len(ring)
        j = n - 1
        for i in range(n):
            yi = ring[i].y
            yj = ring[j].y
            if (yi > y) != (yj > y):
                xi = ring[i].x
                xj = ring[j].x
                x_cross = xi + (xj - xi) * (y - yi) / (yj - yi)
                if x < x_cross:
                    inside = not inside
            j = i
    return inside


def _crossing_param(ax, ay, bx, by, cx, cy, dx, dy):
    """Parameter t on AB where it properly crosses CD, or None.

    Collinear overlaps yield no parameter; the caller's midpoint
    classification decides such runs.
    """
    rx, ry = bx - ax, by - ay
    sx, sy = dx - cx, dy - cy
    denom = rx * sy - ry * sx
    if denom == 0.0:
        return None
    qx, qy = cx - ax, cy - ay
    t = (qx * sy - qy * sx) / denom
    u = (qx * ry - qy * rx) / denom
    if 0.0 <= u <= 1.0 and _PARAM_EPS < t < 1.0 - _PARAM_EPS:
        return t
    return None


def clip_polyline_to_polygon(p: Polyline, polygon: PolygonArea) -> float:
    """Length of the portion of a polyline inside a polygon.

    Each straight piece is sliced at every boundary crossing and each
    sub-piece is classified by its midpoint.
    """
    pxmin, pymin, pxmax, pymax = polygon.bbox
    total = 0.0
    for a, b in zip(p.vertices, p.vertices[1:]):
        if max(a.x, b.x) < pxmin or min(a.x, b.x) > pxmax:
            continue
        if max(a.y, b.y) < pymin or min(a.y, b.y) > pymax:
            continue
        params = [0.0, 1.0]
        for ring in polygon.rings:
            n = len(ring)
            for i in range(n):
                c = ring[i]
                d = ring[(i + 1) % n]
                t = _crossing_param(a.x, a.y, b.x, b.y, c.x, c.y, d.x, d.y)
                if t is not None:
                    params.append(t)
        params.sort()
        piece_len = math.hypot(b.x - a.x, b.y - a.y)
        for t0, t1 in zip(params, params[1:]):
            if t1 - t0 <= _PARAM_EPS:
                continue
            tm = (t0 + t1) / 2.0
            mx = a.x + tm * (b.x - a.x)
            my = a.y + tm * (b.y - a.y)
            if polygon.contains(mx, my):
                total += (t1 - t0) * piece_len
    return total


def _segments_cross(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    rx, ry = bx - ax, by - ay
    sx, sy = dx - cx, dy - cy
    denom = rx * sy - ry * sx
    if denom == 0.0:
        return False
    qx, qy = cx - ax, cy - ay
    t = (qx * sy - qy * sx) / denom
    u = (qx * ry - qy * rx) / denom
    return 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0


def ring_intersects_polygon(ring, polygon: PolygonArea) -> bool:
    """Whether a simple ring and a polygon share any point.

    Covers all containment arrangements: ring inside polygon, polygon
    inside ring, and boundary crossings. A ring sitting entirely inside a
    hole does not intersect.
    """
    for v in ring:
        if polygon.contains(v.x, v.y):
            return True
    ring_only = (tuple(ring),)
    for poly_ring in polygon.rings:
        for v in poly_ring:
            if point_in_rings(v.x, v.y, ring_only):
                return True
    n = len(ring)
    for i in range(n):
        a = ring[i]
        b = ring[(i + 1) % n]
        for poly_ring in polygon.rings:
            m = len(poly_ring)
            for j in range(m):
                c = poly_ring[j]
                d = poly_ring[(j + 1) % m]
                if _segments_cross(a.x, a.y, b.x, b.y, c.x, c.y, d.x, d.y):
                    return True
    return False
