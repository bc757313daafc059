"""Pixel-level processing of street-layout rasters.

Binarization, morphological dilation, and iterative thinning, composed into
an enhancement pass that turns a noisy grayscale street image into a clean
1-px-wide binary skeleton. Streets are white (255) on a black (0) background
throughout; out-of-bounds neighbors count as background.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class RasterPatch:
    """Single-band byte raster with a spatial resolution in meters per pixel.

    ``pixels`` is a read-only (height, width) uint8 array. ``georef``, when
    present, is the Web Mercator coordinate of the top-left corner; pixel
    (row, col) then covers x = x0 + col*resolution .. +resolution and
    y = y0 - row*resolution .. -resolution (rows run north to south).
    """

    pixels: np.ndarray
    resolution: float = 1.0
    georef: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError(f"expected a single-band (height, width) array, got shape {px.shape}")
        if px.dtype != np.uint8:
            if px.size and (px.min() < 0 or px.max() > 255):
                raise ValueError("pixel intensities must lie in 0..255")
            px = px.astype(np.uint8)
        if px.flags.writeable:
            px = px.copy()
            px.setflags(write=False)
        if not self.resolution > 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def is_binary(self) -> bool:
        return bool(np.isin(self.pixels, (0, 255)).all())

    def foreground(self) -> np.ndarray:
        """Boolean street mask (writable copy)."""
        return self.pixels > 0

    def with_pixels(self, pixels: np.ndarray) -> "RasterPatch":
        """New patch with the same georeference but different pixel data."""
        return RasterPatch(pixels, resolution=self.resolution, georef=self.georef)


@dataclass(frozen=True)
class EnhanceConfig:
    """Knobs for the binarize/dilate/thin enhancement pass."""

    threshold: int = 127
    dilate_radius: int = 1
    dilate_iterations: int = 2
    rounds: int = 2

    def to_dict(self) -> dict:
        return asdict(self)


def _require_binary(img: RasterPatch, op: str) -> None:
    if not img.is_binary():
        raise ValueError(f"{op} requires a binary (0/255) patch")


def binarize(img: RasterPatch, threshold: int = 127) -> RasterPatch:
    """Threshold to a {0, 255} street mask.

    The comparison is strictly greater-than, so a pixel exactly at the
    threshold is background.
    """
    out = np.where(img.pixels > threshold, 255, 0).astype(np.uint8)
    return img.with_pixels(out)


def _dilate_axis(mask: np.ndarray, radius: int, axis: int) -> np.ndarray:
    out = mask.copy()
    for d in range(1, radius + 1):
        if axis == 0:
            out[d:, :] |= mask[:-d, :]
            out[:-d, :] |= mask[d:, :]
        else:
            out[:, d:] |= mask[:, :-d]
            out[:, :-d] |= mask[:, d:]
    return out


def dilate(img: RasterPatch, radius: int = 1, iterations: int = 1) -> RasterPatch:
    """Grow the street mask by a square (Chebyshev) structuring element.

    Each iteration sets every pixel within Chebyshev distance ``radius`` of
    a street pixel; the square element of side 2*radius+1 is separable, so
    the two axes are dilated independently.
    """
    if radius < 1:
        raise ConfigurationError(f"dilation radius must be >= 1, got {radius}")
    if iterations < 0:
        raise ConfigurationError(f"dilation iterations must be >= 0, got {iterations}")
    _require_binary(img, "dilate")
    mask = img.foreground()
    for _ in range(iterations):
        mask = _dilate_axis(_dilate_axis(mask, radius, 0), radius, 1)
    return img.with_pixels(mask.astype(np.uint8) * 255)


def _neighborhood(mask: np.ndarray) -> tuple[np.ndarray, ...]:
    """The 8 neighbor planes of the interior of a 1-px padded mask.

    Order is N, NE, E, SE, S, SW, W, NW (clockwise from north), matching the
    classic thinning-neighborhood numbering.
    """
    return (
        mask[:-2, 1:-1],
        mask[:-2, 2:],
        mask[1:-1, 2:],
        mask[2:, 2:],
        mask[2:, 1:-1],
        mask[2:, :-2],
        mask[1:-1, :-2],
        mask[:-2, :-2],
    )


def _thinning_pass(mask: np.ndarray, second_subpass: bool) -> np.ndarray:
    """One parallel deletion sub-pass over a padded mask; returns deletions."""
    p2, p3, p4, p5, p6, p7, p8, p9 = _neighborhood(mask)
    center = mask[1:-1, 1:-1]

    count = (
        p2.astype(np.uint8) + p3 + p4 + p5 + p6 + p7 + p8 + p9
    )
    ring = (p2, p3, p4, p5, p6, p7, p8, p9, p2)
    transitions = np.zeros(center.shape, dtype=np.uint8)
    for a, b in zip(ring[:-1], ring[1:]):
        transitions += (~a) & b

    deletable = center & (count >= 2) & (count <= 6) & (transitions == 1)
    if not second_subpass:
        deletable &= ~(p2 & p4 & p6)
        deletable &= ~(p4 & p6 & p8)
    else:
        deletable &= ~(p2 & p4 & p8)
        deletable &= ~(p2 & p6 & p8)

    out = np.zeros_like(mask)
    out[1:-1, 1:-1] = deletable
    return out


def skeletonize(img: RasterPatch) -> RasterPatch:
    """Thin the street mask to a 1-px-wide skeleton.

    Runs the two-sub-pass parallel thinning of Zhang and Suen until no pixel
    changes; 8-connectivity of the foreground is preserved.
    """
    _require_binary(img, "skeletonize")
    mask = np.pad(img.foreground(), 1)
    while True:
        changed = False
        for second in (False, True):
            deletions = _thinning_pass(mask, second)
            if deletions.any():
                mask &= ~deletions
                changed = True
        if not changed:
            break
    out = mask[1:-1, 1:-1].astype(np.uint8) * 255
    return img.with_pixels(out)


def enhance(img: RasterPatch, cfg: EnhanceConfig | None = None) -> RasterPatch:
    """Produce the cleaned skeleton image from a grayscale or binary patch.

    Binarizes, then alternates dilation (healing holes, gaps, and nearby
    parallel strokes) with thinning for ``cfg.rounds`` rounds. Dilation never
    disconnects and thinning preserves connectivity, so the output component
    count never exceeds the binarized input's.
    """
    cfg = cfg or EnhanceConfig()
    if cfg.rounds < 0:
        raise ConfigurationError(f"enhancement rounds must be >= 0, got {cfg.rounds}")
    out = binarize(img, cfg.threshold)
    for _ in range(cfg.rounds):
        out = dilate(out, cfg.dilate_radius, cfg.dilate_iterations)
        out = skeletonize(out)
    return out


def count_components(img: RasterPatch) -> int:
    """Number of 8-connected foreground components."""
    mask = img.foreground()
    seen = np.zeros_like(mask)
    h, w = mask.shape
    count = 0
    for r0, c0 in zip(*np.nonzero(mask)):
        if seen[r0, c0]:
            continue
        count += 1
        stack = [(int(r0), int(c0))]
        seen[r0, c0] = True
        while stack:
            r, c = stack.pop()
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < h and 0 <= cc < w and mask[rr, cc] and not seen[rr, cc]:
                        seen[rr, cc] = True
                        stack.append((rr, cc))
    return count
