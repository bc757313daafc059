"""Dataset preparation: vector streets to patch-format rasters.

Ingests GeoJSON street networks, filters them by highway category, projects
to spherical Web Mercator, tiles the region into fixed windows, and draws
each window as a white-on-black stroke raster. Also renders StreetGraphs
back to rasters for round-trip testing, and resamples condition layers
(elevation / population / land use) onto patch grids.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import LatitudeOutOfRangeError, MissingCoverageError
from .graph import StreetGraph
from .raster import RasterPatch

WEB_MERCATOR_RADIUS = 6378137.0
MAX_MERCATOR_LATITUDE = 85.05113

DEFAULT_HIGHWAY_TAGS = frozenset(
    {
        "motorway",
        "primary",
        "secondary",
        "tertiary",
        "residential",
        "living_street",
        "pedestrian",
    }
)


@dataclass(frozen=True)
class Polyline:
    """One street centerline with its highway category tag."""

    points: tuple[tuple[float, float], ...]
    highway: str

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise ValueError("a polyline needs at least 2 points")
        if not self.highway:
            raise ValueError("a polyline needs a non-empty highway tag")


@dataclass(frozen=True)
class VectorStreetSet:
    """A set of street polylines in either lon/lat degrees or mercator meters."""

    polylines: tuple[Polyline, ...]
    crs: str = "wgs84"  # "wgs84" (lon/lat degrees) or "mercator" (meters)

    def __post_init__(self) -> None:
        if self.crs not in ("wgs84", "mercator"):
            raise ValueError(f"unknown crs {self.crs!r}")


@dataclass(frozen=True)
class PatchSpec:
    """Raster patch conventions: window size, resolution, stroke width.

    ``origin`` is the Web Mercator coordinate of the top-left corner.
    """

    size: int = 512
    resolution: float = 5.0
    stroke_width: int = 3
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.size <= 0:
            raise ValueError(f"patch size must be positive, got {self.size}")
        if not self.resolution > 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        if self.stroke_width < 1 or self.stroke_width % 2 == 0:
            raise ValueError(f"stroke width must be odd and >= 1, got {self.stroke_width}")

    @property
    def window_m(self) -> float:
        return self.size * self.resolution

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "resolution": self.resolution,
            "stroke_width": self.stroke_width,
            "origin": list(self.origin),
        }


def _normalize_tag(tag: str) -> str:
    return tag.strip().lower().replace(" ", "_")


def filter_highways(
    v: VectorStreetSet, allowed: frozenset[str] | set[str] | None = None
) -> VectorStreetSet:
    """Keep only polylines whose highway tag is in the allowed set.

    Tags are matched after lowercasing and space-to-underscore folding, so
    "living street" and "living_street" are the same category.
    """
    allowed_norm = {_normalize_tag(t) for t in (allowed or DEFAULT_HIGHWAY_TAGS)}
    kept = tuple(p for p in v.polylines if _normalize_tag(p.highway) in allowed_norm)
    return VectorStreetSet(polylines=kept, crs=v.crs)


def project_point(lon: float, lat: float) -> tuple[float, float]:
    """Spherical Web Mercator forward projection of one lon/lat degree pair.

    y uses atanh(sin(lat)), the numerically exact form of
    ln(tan(pi/4 + lat/2)); the naive form misses zero at the equator.
    """
    if abs(lat) > MAX_MERCATOR_LATITUDE:
        raise LatitudeOutOfRangeError(
            f"latitude {lat} outside +/-{MAX_MERCATOR_LATITUDE} degrees"
        )
    x = WEB_MERCATOR_RADIUS * math.radians(lon)
    y = WEB_MERCATOR_RADIUS * math.atanh(math.sin(math.radians(lat)))
    return x, y


def project_web_mercator(v: VectorStreetSet) -> VectorStreetSet:
    """Project a lon/lat street set to Web Mercator meters."""
    if v.crs == "mercator":
        return v
    projected = tuple(
        Polyline(points=tuple(project_point(lon, lat) for lon, lat in p.points), highway=p.highway)
        for p in v.polylines
    )
    return VectorStreetSet(polylines=projected, crs="mercator")


def _clip_segment(
    p0: tuple[float, float], p1: tuple[float, float], lo: float, hi_x: float, hi_y: float
) -> tuple[tuple[float, float], tuple[float, float]] | None:
    """Liang-Barsky clip of a segment to [lo, hi_x] x [lo, hi_y]; None if outside."""
    x0, y0 = p0
    dx, dy = p1[0] - x0, p1[1] - y0
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, x0 - lo),
        (dx, hi_x - x0),
        (-dy, y0 - lo),
        (dy, hi_y - y0),
    ):
        if p == 0:
            if q < 0:
                return None
            continue
        t = q / p
        if p < 0:
            if t > t1:
                return None
            t0 = max(t0, t)
        else:
            if t < t0:
                return None
            t1 = min(t1, t)
    return (x0 + t0 * dx, y0 + t0 * dy), (x0 + t1 * dx, y0 + t1 * dy)


def _stamp_line(mask: np.ndarray, r0: int, c0: int, r1: int, c1: int, brush: int) -> None:
    """Bresenham centerline with a square brush of odd width ``brush``."""
    h, w = mask.shape
    half = brush // 2
    dr, dc = abs(r1 - r0), abs(c1 - c0)
    sr = 1 if r0 < r1 else -1
    sc = 1 if c0 < c1 else -1
    err = dc - dr
    r, c = r0, c0
    while True:
        top, left = r - half, c - half
        mask[max(0, top) : min(h, top + brush), max(0, left) : min(w, left + brush)] = True
        if r == r1 and c == c1:
            break
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr
    return


def _graph_segments_px(g: StreetGraph, spec: PatchSpec) -> list[tuple[float, float, float, float]]:
    segments = []
    for i, j in sorted(g.edges):
        (x1, y1), (x2, y2) = g.vertices[i], g.vertices[j]
        if g.unit == "px" and g.georef is None:
            # Bare pixel graph: coordinates are already patch pixels.
            segments.append((x1, y1, x2, y2))
        else:
            if g.unit == "px":
                gx, gy = g.georef
                x1, y1 = gx + x1 * g.resolution, gy - y1 * g.resolution
                x2, y2 = gx + x2 * g.resolution, gy - y2 * g.resolution
            ox, oy = spec.origin
            segments.append(
                (
                    (x1 - ox) / spec.resolution,
                    (oy - y1) / spec.resolution,
                    (x2 - ox) / spec.resolution,
                    (oy - y2) / spec.resolution,
                )
            )
    return segments


def rasterize(geometry: VectorStreetSet | StreetGraph, spec: PatchSpec) -> RasterPatch:
    """Draw street segments as 255-valued strokes on a 0 background.

    Each segment is clipped to the patch window, traced with Bresenham, and
    stamped with a square brush of ``spec.stroke_width`` pixels.
    """
    mask = np.zeros((spec.size, spec.size), dtype=bool)

    if isinstance(geometry, StreetGraph):
        segments = _graph_segments_px(geometry, spec)
    else:
        if geometry.crs != "mercator":
            raise ValueError("rasterize needs Web Mercator geometry; project first")
        ox, oy = spec.origin
        segments = []
        for poly in geometry.polylines:
            pts = [((x - ox) / spec.resolution, (oy - y) / spec.resolution) for x, y in poly.points]
            segments.extend((a[0], a[1], b[0], b[1]) for a, b in zip(pts[:-1], pts[1:]))

    margin = float(spec.stroke_width)
    for x1, y1, x2, y2 in segments:
        clipped = _clip_segment((x1, y1), (x2, y2), -margin, spec.size + margin, spec.size + margin)
        if clipped is None:
            continue
        (cx1, cy1), (cx2, cy2) = clipped
        _stamp_line(
            mask,
            int(round(cy1)),
            int(round(cx1)),
            int(round(cy2)),
            int(round(cx2)),
            spec.stroke_width,
        )

    return RasterPatch(
        mask.astype(np.uint8) * 255, resolution=spec.resolution, georef=spec.origin
    )


def crop_patches(
    v: VectorStreetSet,
    size: int = 512,
    resolution: float = 5.0,
    stroke_width: int = 3,
) -> list[tuple[PatchSpec, RasterPatch]]:
    """Tile the street set into non-overlapping window rasters.

    Windows are size*resolution meters on a side, snapped to multiples of
    the window size; only windows whose raster contains any street pixel
    are returned, ordered row-major from the top-left window.
    """
    if v.crs != "mercator":
        raise ValueError("crop_patches needs Web Mercator geometry; project first")
    window = size * resolution
    margin = stroke_width * resolution

    candidates: set[tuple[int, int]] = set()
    for poly in v.polylines:
        xs = [x for x, _ in poly.points]
        ys = [y for _, y in poly.points]
        ix0 = math.floor((min(xs) - margin) / window)
        ix1 = math.floor((max(xs) + margin) / window)
        iy0 = math.floor((min(ys) - margin) / window)
        iy1 = math.floor((max(ys) + margin) / window)
        candidates.update(
            (ix, iy) for ix in range(ix0, ix1 + 1) for iy in range(iy0, iy1 + 1)
        )

    # Row-major: top row (largest y) first, then left to right.
    ordered = sorted(candidates, key=lambda t: (-t[1], t[0]))
    out = []
    for ix, iy in ordered:
        spec = PatchSpec(
            size=size,
            resolution=resolution,
            stroke_width=stroke_width,
            origin=(ix * window, (iy + 1) * window),
        )
        patch = rasterize(v, spec)
        if patch.pixels.any():
            out.append((spec, patch))
    return out


@dataclass(frozen=True)
class RasterSource:
    """Georeferenced scalar grid used as a condition-layer source."""

    grid: np.ndarray
    resolution: float
    origin: tuple[float, float]  # top-left, Web Mercator meters

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=np.float64)
        if grid.ndim != 2:
            raise ValueError(f"source grid must be 2-D, got shape {grid.shape}")
        if not self.resolution > 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        object.__setattr__(self, "grid", grid)


CONDITION_LAYER_NAMES = ("elevation", "population", "landuse")


@dataclass(frozen=True)
class ConditionSet:
    """Aligned elevation / population / land-use patches for one window.

    ``ranges`` records each layer's pre-normalization (min, max) so byte
    values can be mapped back to source units.
    """

    elevation: RasterPatch
    population: RasterPatch
    landuse: RasterPatch
    ranges: dict[str, tuple[float, float]]

    def layer(self, name: str) -> RasterPatch:
        return getattr(self, name)


def resample_nearest(source: RasterSource, spec: PatchSpec) -> np.ndarray:
    sx, sy = source.origin
    rows_s, cols_s = source.grid.shape
    # Patch pixel centers, mapped onto source cell indices.
    px_centers = spec.origin[0] + (np.arange(spec.size) + 0.5) * spec.resolution
    py_centers = spec.origin[1] - (np.arange(spec.size) + 0.5) * spec.resolution
    cols = np.floor((px_centers - sx) / source.resolution).astype(int)
    rows = np.floor((sy - py_centers) / source.resolution).astype(int)
    if (
        cols.min() < 0
        or cols.max() >= cols_s
        or rows.min() < 0
        or rows.max() >= rows_s
    ):
        raise MissingCoverageError("source grid does not cover the patch window")
    return source.grid[np.ix_(rows, cols)]


def _normalize_to_bytes(values: np.ndarray) -> tuple[np.ndarray, tuple[float, float]]:
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return np.zeros(values.shape, dtype=np.uint8), (lo, hi)
    scaled = np.rint((values - lo) / (hi - lo) * 255.0)
    return scaled.astype(np.uint8), (lo, hi)


def align_condition_layers(spec: PatchSpec, layers: dict[str, RasterSource]) -> ConditionSet:
    """Nearest-neighbor resample named sources onto the patch grid.

    Requires the three condition layers (elevation, population, landuse);
    each is normalized to bytes per layer with its range recorded.
    """
    missing = [n for n in CONDITION_LAYER_NAMES if n not in layers]
    if missing:
        raise ValueError(f"missing condition layers: {', '.join(missing)}")
    patches: dict[str, RasterPatch] = {}
    ranges: dict[str, tuple[float, float]] = {}
    for name in CONDITION_LAYER_NAMES:
        values = resample_nearest(layers[name], spec)
        data, rng = _normalize_to_bytes(values)
        patches[name] = RasterPatch(data, resolution=spec.resolution, georef=spec.origin)
        ranges[name] = rng
    return ConditionSet(
        elevation=patches["elevation"],
        population=patches["population"],
        landuse=patches["landuse"],
        ranges=ranges,
    )


def save_raster_source(source: RasterSource, path: str | Path) -> Path:
    """Write a source grid as .npy with a JSON georeference header."""
    path = Path(path)
    np.save(path.with_suffix(".npy"), source.grid)
    header = {"resolution": source.resolution, "origin": list(source.origin)}
    path.with_suffix(".json").write_text(
        json.dumps(header, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path.with_suffix(".npy")


def load_raster_source(path: str | Path) -> RasterSource:
    path = Path(path)
    grid = np.load(path.with_suffix(".npy"))
    header = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    return RasterSource(
        grid=grid, resolution=float(header["resolution"]), origin=tuple(header["origin"])
    )


def streets_from_geojson(obj: dict, tag_property: str = "highway") -> VectorStreetSet:
    """Read LineString/MultiLineString features into a street set.

    Coordinates are taken as lon/lat degrees unless the collection metadata
    declares "crs": "mercator".
    """
    if obj.get("type") != "FeatureCollection":
        raise ValueError("expected a GeoJSON FeatureCollection")
    crs = obj.get("metadata", {}).get("crs", "wgs84")
    polylines: list[Polyline] = []
    for feature in obj.get("features", []):
        geom = feature.get("geometry") or {}
        tag = (feature.get("properties") or {}).get(tag_property)
        if not tag:
            continue
        if geom.get("type") == "LineString":
            parts = [geom["coordinates"]]
        elif geom.get("type") == "MultiLineString":
            parts = geom["coordinates"]
        else:
            continue
        for coords in parts:
            if len(coords) >= 2:
                polylines.append(
                    Polyline(points=tuple((float(x), float(y)) for x, y in coords), highway=tag)
                )
    return VectorStreetSet(polylines=tuple(polylines), crs=crs)


def load_streets_geojson(path: str | Path, tag_property: str = "highway") -> VectorStreetSet:
    return streets_from_geojson(
        json.loads(Path(path).read_text(encoding="utf-8")), tag_property=tag_property
    )
