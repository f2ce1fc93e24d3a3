"""Input parsing and rule-driven extraction of dedicated infrastructure.

Feature collections arrive as GeoJSON-style documents whose coordinates
must already be projected meters; anything that looks like lon/lat degrees
is rejected outright. Classification is a small declarative rule engine:
an ordered list of predicates over the attribute map, first match wins,
non-matching features are dropped.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CrsError, ParseError, UnsupportedGeometryError
from .geometry import GeometryError, Point2D, Polyline
from .graph import NetworkEdge
from .polygons import PolygonArea

log = logging.getLogger(__name__)

__all__ = [
    "RawFeature",
    "ClassificationRule",
    "Dataset",
    "parse_dataset",
    "classify",
    "load_rules",
    "load_study_area",
    "load_polygon_layer",
    "load_population_csv",
]

INFRA_CATEGORIES = ("protected", "unprotected")
MAPPING_MODELS = ("centerline", "separate_geometry")
DIRECTIONALITIES = ("oneway", "bidirectional")


@dataclass(frozen=True)
class RawFeature:
    geometry: Polyline
    attributes: dict
    source_id: str


@dataclass(frozen=True)
class ClassificationRule:
    """One ordered rule: a predicate tree plus a full outcome.

    Predicate nodes are plain dicts:
      {"key": K, "equals": V}   attribute K equals V
      {"key": K, "in": [...]}   attribute K is one of the listed values
      {"key": K, "present": true}   attribute K has a nonempty value
      {"all": [...]} / {"any": [...]} / {"not": {...}}   combinators
    """

    predicate: dict
    infra_category: str
    mapping_model: str
    directionality: str

    def __post_init__(self):
        if self.infra_category not in INFRA_CATEGORIES:
            raise ValueError(f"unknown infra_category {self.infra_category!r}")
        if self.mapping_model not in MAPPING_MODELS:
            raise ValueError(f"unknown mapping_model {self.mapping_model!r}")
        if self.directionality not in DIRECTIONALITIES:
            raise ValueError(f"unknown directionality {self.directionality!r}")
        _validate_predicate(self.predicate)

    def matches(self, attributes: dict) -> bool:
        return _eval_predicate(self.predicate, attributes)


def _validate_predicate(node) -> None:
    if not isinstance(node, dict):
        raise ValueError(f"predicate node must be a mapping, got {type(node).__name__}")
    if "all" in node or "any" in node:
        key = "all" if "all" in node else "any"
        children = node[key]
        if not isinstance(children, list) or not children:
            raise ValueError(f"'{key}' needs a nonempty list of predicates")
        for child in children:
            _validate_predicate(child)
    elif "not" in node:
        _validate_predicate(node["not"])
    elif "key" in node:
        if not isinstance(node["key"], str):
            raise ValueError("predicate 'key' must be a string")
        if not any(op in node for op in ("equals", "in", "present")):
            raise ValueError(f"predicate on key {node['key']!r} needs equals/in/present")
    else:
        raise ValueError(f"unrecognized predicate node: {node!r}")


def _eval_predicate(node, attributes) -> bool:
    if "all" in node:
        return all(_eval_predicate(c, attributes) for c in node["all"])
    if "any" in node:
        return any(_eval_predicate(c, attributes) for c in node["any"])
    if "not" in node:
        return not _eval_predicate(node["not"], attributes)
    value = attributes.get(node["key"])
    if "equals" in node:
        return value == str(node["equals"])
    if "in" in node:
        return value is not None and value in [str(v) for v in node["in"]]
    return value is not None and value != ""


@dataclass
class Dataset:
    name: str
    edges: list = field(default_factory=list)
    crs_label: str = "projected-meters"


def _load_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(path, str(exc)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.msg, line=exc.lineno, column=exc.colno) from exc


def _clean_coords(coords):
    points = []
    for xy in coords:
        pt = Point2D(float(xy[0]), float(xy[1]))
        if points and pt.x == points[-1].x and pt.y == points[-1].y:
            continue
        points.append(pt)
    if len(points) < 2:
        return None
    return Polyline(tuple(points))


def _looks_geographic(features) -> bool:
    saw_any = False
    for feat in features:
        for v in feat.geometry.vertices:
            saw_any = True
            if abs(v.x) > 180.0 or abs(v.y) > 90.0:
                return False
    return saw_any


def parse_dataset(path) -> list[RawFeature]:
    """Read a line feature collection into RawFeatures.

    MultiLineStrings split into one feature per part with ``#<n>``
    suffixed ids. Degenerate geometries (under two distinct vertices) are
    dropped with a logged count; non-line geometries and degree-like
    coordinates are hard errors.
    """
    doc = _load_json(path)
    if doc.get("type") != "FeatureCollection" or "features" not in doc:
        raise ParseError(path, "expected a FeatureCollection with a 'features' list")

    features: list[RawFeature] = []
    bad_type_ids: list[str] = []
    dropped = 0
    for i, feat in enumerate(doc["features"]):
        props = feat.get("properties") or {}
        source_id = str(feat.get("id", props.get("id", f"feature-{i}")))
        attributes = {str(k): str(v) for k, v in props.items() if v is not None}
        geom = feat.get("geometry") or {}
        gtype = geom.get("type")
        if gtype == "LineString":
            parts = [geom.get("coordinates", [])]
            ids = [source_id]
        elif gtype == "MultiLineString":
            parts = geom.get("coordinates", [])
            ids = [f"{source_id}#{k}" for k in range(len(parts))]
        else:
            bad_type_ids.append(source_id)
            continue
        for part_id, coords in zip(ids, parts):
            try:
                line = _clean_coords(coords)
            except (GeometryError, TypeError, IndexError, ValueError) as exc:
                raise ParseError(path, f"feature {part_id}: {exc}") from exc
            if line is None:
                dropped += 1
                continue
            features.append(RawFeature(geometry=line, attributes=attributes, source_id=part_id))

    if bad_type_ids:
        raise UnsupportedGeometryError(path, bad_type_ids)
    if dropped:
        log.warning("%s: dropped %d degenerate (zero-length) feature(s)", path, dropped)
    if _looks_geographic(features):
        raise CrsError(
            f"{path}: every coordinate falls within |x|<=180, |y|<=90, which looks like "
            "lon/lat degrees. Reproject the data to a planar CRS in meters first."
        )
    return features


def classify(features, rules, name: str, crs_label: str = "projected-meters") -> Dataset:
    """Apply ordered classification rules; first match wins.

    Matching features become network edges carrying the rule outcome and
    the full attribute map; the rest are dropped. An empty result is a
    warning, not an error.
    """
    if not rules:
        raise ValueError("classification needs at least one rule")
    edges = []
    for feat in features:
        for rule in rules:
            if rule.matches(feat.attributes):
                edges.append(
                    NetworkEdge(
                        id=feat.source_id,
                        geometry=feat.geometry,
                        infra_category=rule.infra_category,
                        mapping_model=rule.mapping_model,
                        directionality=rule.directionality,
                        attributes=dict(feat.attributes),
                    )
                )
                break
    if not edges:
        log.warning("dataset %r: no features matched any classification rule", name)
    return Dataset(name=name, edges=edges, crs_label=crs_label)


def load_rules(path) -> dict[str, list[ClassificationRule]]:
    """Load per-dataset rule lists from a JSON rules file.

    Layout: ``{"<dataset role>": [{"match": <predicate>, "assign":
    {"infra_category": ..., "mapping_model": ..., "directionality": ...}},
    ...], ...}``.
    """
    doc = _load_json(path)
    if not isinstance(doc, dict) or not doc:
        raise ParseError(path, "rules file must map dataset roles to rule lists")
    out: dict[str, list[ClassificationRule]] = {}
    for role, entries in doc.items():
        if not isinstance(entries, list) or not entries:
            raise ParseError(path, f"role {role!r}: expected a nonempty rule list")
        rules = []
        for i, entry in enumerate(entries):
            try:
                assign = entry["assign"]
                rules.append(
                    ClassificationRule(
                        predicate=entry["match"],
                        infra_category=assign["infra_category"],
                        mapping_model=assign["mapping_model"],
                        directionality=assign["directionality"],
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(path, f"role {role!r}, rule {i}: {exc}") from exc
        out[role] = rules
    return out


def _rings_from_polygon_coords(coords):
    rings = []
    for ring_coords in coords:
        pts = [Point2D(float(x), float(y)) for x, y in ring_coords]
        if len(pts) > 1 and pts[0].x == pts[-1].x and pts[0].y == pts[-1].y:
            pts = pts[:-1]  # drop GeoJSON closing vertex
        rings.append(tuple(pts))
    return tuple(rings)


def _polygon_parts(feat, fallback_name):
    props = feat.get("properties") or {}
    name = str(props.get("name", feat.get("id", fallback_name)))
    geom = feat.get("geometry") or {}
    gtype = geom.get("type")
    if gtype == "Polygon":
        all_coords = [geom["coordinates"]]
    elif gtype == "MultiPolygon":
        all_coords = geom["coordinates"]
    else:
        return name, None
    return name, [PolygonArea(rings=_rings_from_polygon_coords(c), name=name) for c in all_coords]


def load_study_area(path) -> list[PolygonArea]:
    """Polygon part(s) delimiting the study area."""
    doc = _load_json(path)
    if doc.get("type") != "FeatureCollection" or not doc.get("features"):
        raise ParseError(path, "expected a FeatureCollection with at least one polygon feature")
    parts: list[PolygonArea] = []
    bad = []
    for i, feat in enumerate(doc["features"]):
        name, feat_parts = _polygon_parts(feat, f"study-{i}")
        if feat_parts is None:
            bad.append(name)
        else:
            parts.extend(feat_parts)
    if bad:
        raise UnsupportedGeometryError(path, bad)
    return parts


def load_polygon_layer(path) -> list[PolygonArea]:
    """Named administrative polygons; MultiPolygons split into same-named parts."""
    doc = _load_json(path)
    if doc.get("type") != "FeatureCollection" or not doc.get("features"):
        raise ParseError(path, "expected a FeatureCollection with polygon features")
    parts: list[PolygonArea] = []
    bad = []
    for i, feat in enumerate(doc["features"]):
        name, feat_parts = _polygon_parts(feat, f"polygon-{i}")
        if feat_parts is None:
            bad.append(name)
        else:
            parts.extend(feat_parts)
    if bad:
        raise UnsupportedGeometryError(path, bad)
    return parts


def load_population_csv(path) -> dict[str, float]:
    """Per-cell population from a two-column header CSV: cell_id, population."""
    import csv

    out: dict[str, float] = {}
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "cell_id" not in reader.fieldnames or "population" not in reader.fieldnames:
                raise ParseError(path, "expected header columns: cell_id, population")
            for i, row in enumerate(reader, start=2):
                try:
                    out[row["cell_id"]] = float(row["population"])
                except (TypeError, ValueError) as exc:
                    raise ParseError(path, f"bad population value: {row['population']!r}", line=i) from exc
    except OSError as exc:
        raise ParseError(path, str(exc)) from exc
    return out
