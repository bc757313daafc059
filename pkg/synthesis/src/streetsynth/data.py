"""Condition sets and dataset IO against the patch-manifest file format.

The trainer consumes directories produced by the dataset-preparation
tooling: a ``manifest.json`` listing patches, each with three condition
layer PNGs (elevation, population, landuse) and optionally a target street
image. Generated layouts are written back as single-band PNGs with a JSON
sidecar carrying the resolution, which the extraction CLI reads directly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

LAYER_NAMES = ("elevation", "population", "landuse")


@dataclass(frozen=True)
class ConditionSet:
    """Aligned elevation / population / land-use layers, values in [0, 1]."""

    elevation: np.ndarray
    population: np.ndarray
    landuse: np.ndarray

    def __post_init__(self) -> None:
        shapes = {layer.shape for layer in self._layers()}
        if len(shapes) != 1:
            raise ValueError(f"condition layers disagree on shape: {shapes}")
        for name, layer in zip(LAYER_NAMES, self._layers()):
            if layer.ndim != 2:
                raise ValueError(f"{name} layer must be 2-D, got shape {layer.shape}")
            if not np.isfinite(layer).all():
                raise ValueError(f"{name} layer contains non-finite values")
            if layer.size and (layer.min() < 0.0 or layer.max() > 1.0):
                raise ValueError(f"{name} layer values must lie in [0, 1]")

    def _layers(self) -> tuple[np.ndarray, ...]:
        return (self.elevation, self.population, self.landuse)

    @property
    def shape(self) -> tuple[int, int]:
        return self.elevation.shape

    def to_tensor(self) -> torch.Tensor:
        """Stack to a (1, 3, H, W) float tensor."""
        stacked = np.stack([np.asarray(a, dtype=np.float32) for a in self._layers()])
        return torch.from_numpy(stacked).unsqueeze(0)


def load_png_unit(path: str | Path) -> np.ndarray:
    """Single-band PNG as float32 in [0, 1]."""
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.float32) / 255.0


def save_png_unit(
    array: np.ndarray,
    path: str | Path,
    resolution: float = 5.0,
    metadata: dict | None = None,
) -> Path:
    """Write a [0, 1] array as an 8-bit PNG plus a georeference sidecar."""
    path = Path(path)
    data = np.clip(np.asarray(array, dtype=np.float64), 0.0, 1.0)
    Image.fromarray(np.rint(data * 255.0).astype(np.uint8), mode="L").save(path, format="PNG")
    sidecar = {
        "resolution": resolution,
        "georef": None,
        "width": int(data.shape[1]),
        "height": int(data.shape[0]),
    }
    if metadata:
        sidecar.update(metadata)
    path.with_suffix(".json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path


@dataclass(frozen=True)
class Sample:
    patch_id: str
    conditions: ConditionSet
    target: np.ndarray | None  # [0, 1] street image, when present
    resolution: float


def load_manifest_dataset(directory: str | Path) -> list[Sample]:
    """Read every patch with condition layers from a manifest directory."""
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    samples: list[Sample] = []
    for entry in manifest.get("patches", []):
        layers = entry.get("layers")
        if not layers:
            continue
        missing = [n for n in LAYER_NAMES if n not in layers]
        if missing:
            raise ValueError(f"patch {entry.get('id')}: missing layers {missing}")
        arrays = {n: load_png_unit(directory / layers[n]) for n in LAYER_NAMES}
        target = None
        if entry.get("street_image"):
            target = load_png_unit(directory / entry["street_image"])
        samples.append(
            Sample(
                patch_id=str(entry.get("id", f"patch_{len(samples)}")),
                conditions=ConditionSet(**arrays),
                target=target,
                resolution=float(entry.get("resolution", 5.0)),
            )
        )
    return samples
