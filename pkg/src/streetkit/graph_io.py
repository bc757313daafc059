"""GeoJSON export and import for street graphs.

A graph serializes as a FeatureCollection with one LineString per edge,
sorted by vertex ids so output bytes are stable. Coordinates are Web
Mercator meters when the graph carries a georeference, pixel units
otherwise; each feature's properties say which.
"""
from __future__ import annotations

import json
from pathlib import Path

from .graph import StreetGraph


def _vertex_to_coords(g: StreetGraph, vid: int) -> list[float]:
    x, y = g.vertices[vid]
    if g.unit == "px" and g.georef is not None:
        x0, y0 = g.georef
        return [x0 + x * g.resolution, y0 - y * g.resolution]
    return [x, y]


def graph_to_geojson(g: StreetGraph, metadata: dict | None = None) -> dict:
    """Serialize to a GeoJSON FeatureCollection dict."""
    unit = "m" if (g.unit == "m" or g.georef is not None) else "px"
    features = []
    for i, j in sorted(g.edges):
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [_vertex_to_coords(g, i), _vertex_to_coords(g, j)],
                },
                "properties": {"vertex_ids": [i, j], "unit": unit},
            }
        )
    meta = {
        "unit": unit,
        "resolution": g.resolution,
        "georef": list(g.georef) if g.georef is not None else None,
        "extent": list(g.extent) if g.extent is not None else None,
        "vertex_count": len(g.vertices),
    }
    if metadata:
        meta.update(metadata)
    return {"type": "FeatureCollection", "metadata": meta, "features": features}


def graph_from_geojson(obj: dict) -> StreetGraph:
    """Rebuild a StreetGraph from a FeatureCollection produced by this module."""
    if obj.get("type") != "FeatureCollection":
        raise ValueError("expected a GeoJSON FeatureCollection")
    meta = obj.get("metadata", {})
    unit = meta.get("unit", "px")
    vertices: dict[int, tuple[float, float]] = {}
    edges: set[tuple[int, int]] = set()
    for feature in obj.get("features", []):
        props = feature.get("properties", {})
        ids = props.get("vertex_ids")
        coords = feature.get("geometry", {}).get("coordinates")
        if not ids or not coords or len(ids) != len(coords):
            raise ValueError("feature is missing vertex_ids/coordinates")
        for vid, (x, y) in zip(ids, coords):
            vertices[int(vid)] = (float(x), float(y))
        edges.add((int(ids[0]), int(ids[1])))
    georef = tuple(meta["georef"]) if meta.get("georef") else None
    extent = tuple(meta["extent"]) if meta.get("extent") else None
    return StreetGraph(
        vertices=vertices,
        edges=edges,
        resolution=float(meta.get("resolution", 1.0)),
        georef=georef,
        unit=unit,
        extent=extent,
    )


def save_geojson(g: StreetGraph, path: str | Path, metadata: dict | None = None) -> Path:
    path = Path(path)
    payload = graph_to_geojson(g, metadata)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_geojson(path: str | Path) -> StreetGraph:
    return graph_from_geojson(json.loads(Path(path).read_text(encoding="utf-8")))
