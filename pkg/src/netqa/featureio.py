"""Deterministic writers for the output layers and tables.

Every writer produces byte-identical files for identical inputs: keys are
sorted, floats rounded at fixed precision, newlines fixed to \\n. Nothing
time-dependent belongs in these files; run metadata with timestamps goes
in its own file excluded from golden comparisons.
"""

from __future__ import annotations

import json
from pathlib import Path

__all__ = [
    "round_metric",
    "polyline_coords",
    "line_feature",
    "point_feature",
    "polygon_feature",
    "write_feature_collection",
    "write_json",
    "write_csv",
]

COORD_DECIMALS = 6
METRIC_DECIMALS = 9


def round_metric(x, decimals: int = METRIC_DECIMALS):
    if x is None:
        return None
    return round(float(x), decimals)


def polyline_coords(polyline) -> list:
    return [[round(v.x, COORD_DECIMALS), round(v.y, COORD_DECIMALS)] for v in polyline.vertices]


def line_feature(coords, properties, feature_id=None) -> dict:
    feat = {"type": "Feature", "geometry": {"type": "LineString", "coordinates": coords}, "properties": properties}
    if feature_id is not None:
        feat["id"] = feature_id
    return feat


def point_feature(x, y, properties, feature_id=None) -> dict:
    feat = {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [round(x, COORD_DECIMALS), round(y, COORD_DECIMALS)]},
        "properties": properties,
    }
    if feature_id is not None:
        feat["id"] = feature_id
    return feat


def polygon_feature(rings, properties, feature_id=None) -> dict:
    coords = []
    for ring in rings:
        closed = [[round(v.x, COORD_DECIMALS), round(v.y, COORD_DECIMALS)] for v in ring]
        closed.append(closed[0])
        coords.append(closed)
    feat = {"type": "Feature", "geometry": {"type": "Polygon", "coordinates": coords}, "properties": properties}
    if feature_id is not None:
        feat["id"] = feature_id
    return feat


def write_feature_collection(path, features, extra: dict | None = None) -> None:
    doc = {"type": "FeatureCollection", "features": features}
    if extra:
        doc.update(extra)
    write_json(path, doc)


def write_json(path, obj) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_csv(path, header, rows) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
