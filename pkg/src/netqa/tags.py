"""Attribute-key coverage along the network.

Measures only whether selected keys are present with a nonempty value,
never whether the values are plausible. Shares are weighted by
infrastructure length, so a long untagged edge drags coverage down more
than a short one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import polyline_length
from .hexgrid import HexGrid

__all__ = ["TagSpec", "TagShare", "DEFAULT_TAG_SPECS", "tag_presence", "tag_share"]


@dataclass(frozen=True)
class TagSpec:
    """A logical tag backed by one or more attribute keys; any one counts."""

    name: str
    keys: tuple[str, ...]

    def __post_init__(self):
        if not self.keys:
            raise ValueError(f"tag spec {self.name!r} needs at least one key")


DEFAULT_TAG_SPECS = (
    TagSpec("surface", ("surface", "cycleway:surface")),
    TagSpec("lit", ("lit",)),
    TagSpec("width", ("width", "cycleway:width")),
    TagSpec("maxspeed", ("maxspeed",)),
)


def tag_presence(edge, spec: TagSpec) -> bool:
    """True iff any of the spec's keys has a nonempty value on the edge."""
    for key in spec.keys:
        value = edge.attributes.get(key)
        if value is not None and value != "":
            return True
    return False


@dataclass(frozen=True)
class TagShare:
    tag_name: str
    global_pct: float | None
    per_cell_pct: dict


def tag_share(edges, spec: TagSpec, grid: HexGrid, policy=None) -> TagShare:
    """Percent of infrastructure length carrying the tag, global and per cell.

    Lengths are multiplier-adjusted when a policy is given, raw geometric
    otherwise. Cells without infrastructure are absent, not zero.
    """
    total_global = 0.0
    tagged_global = 0.0
    cell_total: dict = {}
    cell_tagged: dict = {}
    for edge in edges:
        factor = policy.factor_for(edge) if policy is not None else 1.0
        present = tag_presence(edge, spec)
        length = polyline_length(edge.geometry) * factor
        total_global += length
        if present:
            tagged_global += length
        for cell, clipped in grid.clip_polyline(edge.geometry).items():
            contribution = clipped * factor
            cell_total[cell] = cell_total.get(cell, 0.0) + contribution
            if present:
                cell_tagged[cell] = cell_tagged.get(cell, 0.0) + contribution
    # tagged and total accumulate the same clip contributions in different
    # orders; clamp away the resulting last-ulp overshoot
    per_cell = {
        cell: min(100.0, max(0.0, 100.0 * cell_tagged.get(cell, 0.0) / cell_total[cell]))
        for cell in sorted(cell_total)
    }
    return TagShare(
        tag_name=spec.name,
        global_pct=min(100.0, 100.0 * tagged_global / total_global) if total_global > 0 else None,
        per_cell_pct=per_cell,
    )
