"""Planar geometric primitives and measures.

All coordinates live in a projected CRS with meter units. Nothing here
reprojects; callers must supply projected data. Everything is a pure
function over immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import GeometryError

__all__ = [
    "Point2D",
    "Polyline",
    "Segment",
    "polyline_length",
    "segmentize",
    "hausdorff_distance",
    "segment_angle_deg",
    "point_to_polyline_distance",
    "point_segment_distance",
]

# Merge threshold below which a trailing cut remainder is folded into the
# previous segment, as a fraction of the requested segment length.
_REMAINDER_MERGE_FRACTION = 0.5
_LENGTH_EPS = 1e-9


@dataclass(frozen=True)
class Point2D:
    """A point in projected planar coordinates, meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite coordinate ({self.x}, {self.y})")

    def distance_to(self, other: "Point2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Polyline:
    """An ordered vertex chain with positive total length.

    Consecutive duplicate vertices are rejected; cleaning of raw input
    happens upstream, at ingestion.
    """

    vertices: tuple[Point2D, ...]

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise GeometryError("polyline needs at least 2 vertices")
        for a, b in zip(self.vertices, self.vertices[1:]):
            if a.x == b.x and a.y == b.y:
                raise GeometryError("polyline has consecutive duplicate vertices")

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)


@dataclass(frozen=True)
class Segment:
    """A straight piece cut from a parent polyline.

    ``start`` and ``end`` are the chord endpoints lying on the parent at
    arc positions ``offset`` and ``offset + arc_length``. For a piece that
    spans parent vertices the chord is shorter than ``arc_length``; all
    length accounting uses ``arc_length`` so that segment lengths always
    sum back to the parent length exactly.
    """

    start: Point2D
    end: Point2D
    parent_edge_id: str
    offset: float
    arc_length: float
    index: int = 0

    def __post_init__(self):
        if self.start.x == self.end.x and self.start.y == self.end.y:
            raise GeometryError(f"degenerate segment on edge {self.parent_edge_id}")
        if self.offset < 0:
            raise GeometryError("segment offset must be >= 0")
        if self.arc_length <= 0:
            raise GeometryError("segment arc_length must be > 0")

    @property
    def midpoint(self) -> Point2D:
        return Point2D((self.start.x + self.end.x) / 2.0, (self.start.y + self.end.y) / 2.0)

    @property
    def chord_length(self) -> float:
        return self.start.distance_to(self.end)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return (
            min(self.start.x, self.end.x),
            min(self.start.y, self.end.y),
            max(self.start.x, self.end.x),
            max(self.start.y, self.end.y),
        )

    @property
    def segment_id(self) -> tuple[str, int]:
        return (self.parent_edge_id, self.index)


def polyline_length(p: Polyline) -> float:
    """Total length of a polyline: sum of vertex-to-vertex distances."""
    total = 0.0
    for a, b in zip(p.vertices, p.vertices[1:]):
        total += math.hypot(b.x - a.x, b.y - a.y)
    return total


def _cumulative_lengths(p: Polyline) -> list[float]:
    cum = [0.0]
    for a, b in zip(p.vertices, p.vertices[1:]):
        cum.append(cum[-1] + math.hypot(b.x - a.x, b.y - a.y))
    return cum


def _point_at(p: Polyline, cum: list[float], distance: float) -> Point2D:
    """Point at arc distance along the polyline, clamped to its extent."""
    if distance <= 0:
        return p.vertices[0]
    if distance >= cum[-1]:
        return p.vertices[-1]
    # cum is sorted; find the piece containing `distance`
    lo, hi = 0, len(cum) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if cum[mid] <= distance:
            lo = mid
        else:
            hi = mid
    a, b = p.vertices[lo], p.vertices[lo + 1]
    span = cum[lo + 1] - cum[lo]
    t = (distance - cum[lo]) / span
    return Point2D(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))


def segmentize(p: Polyline, seg_len: float, parent_edge_id: str = "") -> list[Segment]:
    """Cut a polyline into consecutive pieces of arc length ``seg_len``.

    The pieces cover the polyline in order, without gaps or overlaps. A
    trailing remainder shorter than half of ``seg_len`` is merged into the
    previous piece, so the shortest emitted piece is ``seg_len / 2``; the
    only exception is a polyline shorter than ``seg_len``, which yields a
    single piece covering all of it.

    Parameters
    ----------
    p : Polyline
    seg_len : float
        Target piece length in meters, > 0.
    parent_edge_id : str
        Identifier recorded on every emitted segment.

    Returns
    -------
    list of Segment
    """
    if seg_len <= 0:
        raise GeometryError(f"seg_len must be > 0, got {seg_len}")
    cum = _cumulative_lengths(p)
    total = cum[-1]

    if total <= seg_len:
        boundaries = [0.0, total]
    else:
        n_full = int(math.floor(total / seg_len + 1e-12))
        remainder = total - n_full * seg_len
        boundaries = [k * seg_len for k in range(n_full + 1)]
        if remainder <= _LENGTH_EPS or remainder < seg_len * _REMAINDER_MERGE_FRACTION:
            # exact division up to noise, or a short remainder merged into
            # the last piece; either way the final cut lands on the end
            boundaries[-1] = total
        else:
            boundaries.append(total)

    segments = []
    for i, (d0, d1) in enumerate(zip(boundaries, boundaries[1:])):
        segments.append(
            Segment(
                start=_point_at(p, cum, d0),
                end=_point_at(p, cum, d1),
                parent_edge_id=parent_edge_id,
                offset=d0,
                arc_length=d1 - d0,
                index=i,
            )
        )
    return segments


def point_segment_distance(px: float, py: float, ax: float, ay: float, bx: float, by: float) -> float:
    """Distance from point (px, py) to the closed segment (a, b)."""
    dx = bx - ax
    dy = by - ay
    denom = dx * dx + dy * dy
    if denom == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / denom
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def hausdorff_distance(a: Segment, b: Segment) -> float:
    """Symmetric Hausdorff distance between two straight segments.

    Exact for straight segments: the distance from a point to a segment is
    convex along the other segment, so each directed Hausdorff distance is
    attained at an endpoint. The result is the maximum of the four
    endpoint-to-opposite-segment distances.
    """
    a1x, a1y, a2x, a2y = a.start.x, a.start.y, a.end.x, a.end.y
    b1x, b1y, b2x, b2y = b.start.x, b.start.y, b.end.x, b.end.y
    return max(
        point_segment_distance(a1x, a1y, b1x, b1y, b2x, b2y),
        point_segment_distance(a2x, a2y, b1x, b1y, b2x, b2y),
        point_segment_distance(b1x, b1y, a1x, a1y, a2x, a2y),
        point_segment_distance(b2x, b2y, a1x, a1y, a2x, a2y),
    )


def segment_angle_deg(a: Segment, b: Segment) -> float:
    """Undirected acute angle between two segments, in degrees.

    Folded into [0, 90]: reversing either segment's direction, or swapping
    the operands, leaves the result unchanged.
    """
    ux = a.end.x - a.start.x
    uy = a.end.y - a.start.y
    vx = b.end.x - b.start.x
    vy = b.end.y - b.start.y
    angle = math.degrees(math.atan2(abs(ux * vy - uy * vx), ux * vx + uy * vy))
    if angle > 90.0:
        angle = 180.0 - angle
    return angle


def point_to_polyline_distance(pt: Point2D, p: Polyline) -> float:
    """Minimum distance from a point to any point of a polyline."""
    best = math.inf
    for a, b in zip(p.vertices, p.vertices[1:]):
        d = point_segment_distance(pt.x, pt.y, a.x, a.y, b.x, b.y)
        if d < best:
            best = d
    return best
