"""File round-trips: PNG/PGM patches with sidecars, graph GeoJSON."""
from __future__ import annotations

import json

import numpy as np
import pytest

from streetkit import StreetGraph, graph_from_geojson, graph_to_geojson, load_geojson, save_geojson
from streetkit.patch_io import (
    load_image,
    load_pgm,
    load_png,
    read_sidecar,
    save_pgm,
    save_png,
)

from conftest import make_patch


def _checker(h=12, w=16):
    return ((np.indices((h, w)).sum(axis=0) % 2) * 255).astype(np.uint8)


class TestPatchIO:
    def test_png_round_trip(self, tmp_path):
        patch = make_patch(_checker(), resolution=5.0, georef=(1280.0, 2560.0))
        path = tmp_path / "tile.png"
        save_png(patch, path, metadata={"note": "fixture"})
        loaded = load_png(path)
        assert np.array_equal(loaded.pixels, patch.pixels)
        assert loaded.resolution == 5.0
        assert loaded.georef == (1280.0, 2560.0)
        assert read_sidecar(path)["note"] == "fixture"

    def test_pgm_binary_round_trip(self, tmp_path):
        patch = make_patch(_checker(), resolution=2.0)
        path = tmp_path / "tile.pgm"
        save_pgm(patch, path, binary=True)
        loaded = load_pgm(path)
        assert np.array_equal(loaded.pixels, patch.pixels)
        assert loaded.resolution == 2.0

    def test_pgm_ascii_round_trip(self, tmp_path):
        patch = make_patch(_checker(6, 7))
        path = tmp_path / "tile.pgm"
        save_pgm(patch, path, binary=False)
        assert path.read_bytes().startswith(b"P2")
        loaded = load_pgm(path)
        assert np.array_equal(loaded.pixels, patch.pixels)

    def test_load_image_dispatch(self, tmp_path):
        patch = make_patch(_checker())
        save_png(patch, tmp_path / "a.png")
        save_pgm(patch, tmp_path / "b.pgm")
        assert np.array_equal(load_image(tmp_path / "a.png").pixels, patch.pixels)
        assert np.array_equal(load_image(tmp_path / "b.pgm").pixels, patch.pixels)

    def test_missing_sidecar_defaults(self, tmp_path):
        from PIL import Image

        Image.fromarray(_checker(), mode="L").save(tmp_path / "bare.png")
        loaded = load_png(tmp_path / "bare.png")
        assert loaded.resolution == 1.0 and loaded.georef is None

    def test_pgm_rejects_garbage(self, tmp_path):
        (tmp_path / "bad.pgm").write_bytes(b"NOTPGM")
        with pytest.raises(ValueError):
            load_pgm(tmp_path / "bad.pgm")


def _sample_graph(georef=None, unit="px") -> StreetGraph:
    return StreetGraph(
        vertices={0: (2.0, 3.0), 1: (10.0, 3.0), 2: (10.0, 9.0)},
        edges={(0, 1), (1, 2)},
        resolution=5.0,
        georef=georef,
        unit=unit,
        extent=(64, 64),
    )


class TestGraphGeojson:
    def test_pixel_unit_round_trip(self):
        g = _sample_graph()
        clone = graph_from_geojson(graph_to_geojson(g))
        assert clone.vertices == g.vertices
        assert clone.edges == g.edges
        assert clone.unit == "px"
        assert clone.extent == (64, 64)

    def test_mercator_conversion_when_georeferenced(self):
        g = _sample_graph(georef=(1000.0, 2000.0))
        obj = graph_to_geojson(g)
        assert obj["metadata"]["unit"] == "m"
        feature = obj["features"][0]
        # vertex 0 at px (2,3): x = 1000 + 2*5, y = 2000 - 3*5
        assert feature["geometry"]["coordinates"][0] == [1010.0, 1985.0]
        clone = graph_from_geojson(obj)
        assert clone.unit == "m"
        assert clone.total_length_m() == pytest.approx(g.total_length_m())

    def test_features_sorted_by_vertex_ids(self):
        obj = graph_to_geojson(_sample_graph())
        ids = [tuple(f["properties"]["vertex_ids"]) for f in obj["features"]]
        assert ids == sorted(ids)

    def test_deterministic_bytes(self, tmp_path):
        g = _sample_graph(georef=(500.0, 500.0))
        p1, p2 = tmp_path / "a.geojson", tmp_path / "b.geojson"
        save_geojson(g, p1, metadata={"config": {"seed": 3}})
        save_geojson(g, p2, metadata={"config": {"seed": 3}})
        assert p1.read_bytes() == p2.read_bytes()

    def test_file_round_trip(self, tmp_path):
        g = _sample_graph()
        path = tmp_path / "g.geojson"
        save_geojson(g, path)
        clone = load_geojson(path)
        assert clone.vertices == g.vertices and clone.edges == g.edges

    def test_rejects_non_collection(self):
        with pytest.raises(ValueError):
            graph_from_geojson({"type": "Feature"})

    def test_metadata_echo(self, tmp_path):
        g = _sample_graph()
        path = tmp_path / "g.geojson"
        save_geojson(g, path, metadata={"config": {"rounds": 2}, "seed": 7})
        data = json.loads(path.read_text())
        assert data["metadata"]["config"] == {"rounds": 2}
        assert data["metadata"]["seed"] == 7
