"""Uniform grid hash over bounding boxes.

Candidate retrieval only: queries return a superset of the true hits and
callers apply exact geometry afterwards. Results are sorted, so downstream
tie-breaking never depends on insertion or hash order.
"""

from __future__ import annotations

import math

__all__ = ["GridIndex"]


class GridIndex:
    def __init__(self, cell_size: float):
        if cell_size <= 0 or not math.isfinite(cell_size):
            raise ValueError(f"cell_size must be positive and finite, got {cell_size}")
        self.cell_size = cell_size
        self._cells: dict[tuple[int, int], list] = {}

    def _span(self, bbox):
        xmin, ymin, xmax, ymax = bbox
        c = self.cell_size
        return (
            math.floor(xmin / c),
            math.floor(ymin / c),
            math.floor(xmax / c),
            math.floor(ymax / c),
        )

    def insert(self, item_id, bbox) -> None:
        i0, j0, i1, j1 = self._span(bbox)
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                self._cells.setdefault((i, j), []).append(item_id)

    def query(self, bbox) -> list:
        """Ids whose inserted boxes may intersect ``bbox``, sorted."""
        i0, j0, i1, j1 = self._span(bbox)
        found = set()
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                bucket = self._cells.get((i, j))
                if bucket:
                    found.update(bucket)
        return sorted(found)

    def query_point(self, x: float, y: float, radius: float) -> list:
        return self.query((x - radius, y - radius, x + radius, y + radius))
