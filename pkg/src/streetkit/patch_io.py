"""Reading and writing raster patches as PNG or PGM with JSON sidecars.

The sidecar shares the image's basename (``tile.png`` -> ``tile.json``) and
carries the resolution, the optional Web Mercator origin, and any caller
metadata such as the enhancement configuration used to produce the file.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .raster import RasterPatch


def _sidecar_path(image_path: Path) -> Path:
    return image_path.with_suffix(".json")


def write_sidecar(image_path: str | Path, patch: RasterPatch, metadata: dict | None = None) -> Path:
    path = _sidecar_path(Path(image_path))
    payload = {
        "resolution": patch.resolution,
        "georef": list(patch.georef) if patch.georef is not None else None,
        "width": patch.width,
        "height": patch.height,
    }
    if metadata:
        payload.update(metadata)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_sidecar(image_path: str | Path) -> dict:
    path = _sidecar_path(Path(image_path))
    if not path.exists():
        return {}
    return json.loads(path.read_text(encoding="utf-8"))


def save_png(patch: RasterPatch, path: str | Path, metadata: dict | None = None) -> Path:
    """Write a single-band PNG plus its JSON sidecar."""
    path = Path(path)
    Image.fromarray(patch.pixels, mode="L").save(path, format="PNG")
    write_sidecar(path, patch, metadata)
    return path


def load_png(path: str | Path) -> RasterPatch:
    """Read a PNG (converted to single band if needed) and its sidecar."""
    path = Path(path)
    with Image.open(path) as img:
        pixels = np.asarray(img.convert("L"))
    meta = read_sidecar(path)
    georef = tuple(meta["georef"]) if meta.get("georef") else None
    return RasterPatch(pixels, resolution=float(meta.get("resolution", 1.0)), georef=georef)


def save_pgm(patch: RasterPatch, path: str | Path, binary: bool = True,
             metadata: dict | None = None) -> Path:
    """Write a PGM (P5 binary by default, P2 ASCII otherwise) plus sidecar."""
    path = Path(path)
    header = f"{'P5' if binary else 'P2'}\n{patch.width} {patch.height}\n255\n"
    if binary:
        path.write_bytes(header.encode("ascii") + patch.pixels.tobytes())
    else:
        rows = "\n".join(" ".join(str(v) for v in row) for row in patch.pixels)
        path.write_text(header + rows + "\n", encoding="ascii")
    write_sidecar(path, patch, metadata)
    return path


def load_pgm(path: str | Path) -> RasterPatch:
    """Read an ASCII (P2) or binary (P5) PGM and its sidecar."""
    path = Path(path)
    data = path.read_bytes()
    magic = data[:2].decode("ascii", errors="replace")
    if magic not in ("P2", "P5"):
        raise ValueError(f"{path}: not a PGM file (magic {magic!r})")

    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed through the end of the current line.
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    width, height, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 PGM supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval

    if magic == "P5":
        raw = data[pos : pos + width * height]
        if len(raw) != width * height:
            raise ValueError(f"{path}: truncated PGM pixel data")
        pixels = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
    else:
        values = np.array(data[pos:].split(), dtype=np.uint8)
        if values.size != width * height:
            raise ValueError(f"{path}: expected {width * height} samples, got {values.size}")
        pixels = values.reshape(height, width)

    meta = read_sidecar(path)
    georef = tuple(meta["georef"]) if meta.get("georef") else None
    return RasterPatch(pixels, resolution=float(meta.get("resolution", 1.0)), georef=georef)


def load_image(path: str | Path) -> RasterPatch:
    """Dispatch on extension: .pgm goes to the PGM reader, the rest to PNG."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return load_pgm(path)
    return load_png(path)
