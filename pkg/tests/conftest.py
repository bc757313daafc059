"""Shared fixtures and brute-force oracles for the test suite."""
from __future__ import annotations

import math
import random

import numpy as np
import pytest

from streetkit import RasterPatch, StreetGraph


def make_patch(pixels, resolution=1.0, georef=None) -> RasterPatch:
    return RasterPatch(np.asarray(pixels, dtype=np.uint8), resolution=resolution, georef=georef)


def blank(h: int, w: int) -> np.ndarray:
    return np.zeros((h, w), dtype=np.uint8)


def reference_thinning(mask: np.ndarray) -> np.ndarray:
    """Independent per-pixel implementation of the two-sub-pass thinning.

    Written directly from the algorithm statement (neighbor ring P2..P9
    clockwise from north, parallel deletion per sub-pass); deliberately slow
    and separate from the vectorized production code.
    """
    img = mask.astype(bool).copy()
    h, w = img.shape

    def ring(r: int, c: int) -> list[bool]:
        coords = [
            (r - 1, c), (r - 1, c + 1), (r, c + 1), (r + 1, c + 1),
            (r + 1, c), (r + 1, c - 1), (r, c - 1), (r - 1, c - 1),
        ]
        return [bool(img[rr, cc]) if 0 <= rr < h and 0 <= cc < w else False for rr, cc in coords]

    while True:
        changed = False
        for phase in (0, 1):
            deletions = []
            for r in range(h):
                for c in range(w):
                    if not img[r, c]:
                        continue
                    p = ring(r, c)
                    b = sum(p)
                    if b < 2 or b > 6:
                        continue
                    seq = p + [p[0]]
                    a = sum(1 for k in range(8) if not seq[k] and seq[k + 1])
                    if a != 1:
                        continue
                    if phase == 0:
                        if (p[0] and p[2] and p[4]) or (p[2] and p[4] and p[6]):
                            continue
                    else:
                        if (p[0] and p[2] and p[6]) or (p[0] and p[4] and p[6]):
                            continue
                    deletions.append((r, c))
            for rc in deletions:
                img[rc] = False
            changed = changed or bool(deletions)
        if not changed:
            return img


def count_components_bool(mask: np.ndarray) -> int:
    """Flood-fill count of 8-connected foreground components."""
    seen = np.zeros(mask.shape, dtype=bool)
    h, w = mask.shape
    n = 0
    for r0, c0 in zip(*np.nonzero(mask)):
        if seen[r0, c0]:
            continue
        n += 1
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
    return n


def random_blob_mask(seed: int, h: int = 40, w: int = 40) -> np.ndarray:
    """Random thick strokes, the kind of shape the thinning pass sees."""
    rng = random.Random(seed)
    mask = np.zeros((h, w), dtype=bool)
    for _ in range(rng.randint(1, 4)):
        r, c = rng.randrange(5, h - 5), rng.randrange(5, w - 5)
        for _ in range(rng.randint(10, 40)):
            mask[max(0, r - 1) : r + 2, max(0, c - 1) : c + 2] = True
            r = min(h - 2, max(1, r + rng.choice((-1, 0, 1))))
            c = min(w - 2, max(1, c + rng.choice((-1, 0, 1))))
    return mask


def grid_street_graph(
    seed: int,
    cells_x: int = 3,
    cells_y: int = 3,
    spacing: float = 48.0,
    jitter: float = 2.0,
    margin: float = 16.0,
    resolution: float = 5.0,
) -> StreetGraph:
    """Jittered grid-like planar street graph in pixel coordinates.

    Interior edges are randomly dropped, but only while both endpoints keep
    degree >= 3, so every degree-2 vertex is a true corner that survives
    extraction unchanged.
    """
    rng = random.Random(seed)
    nx, ny = cells_x + 1, cells_y + 1
    vertices: dict[int, tuple[float, float]] = {}
    for gy in range(ny):
        for gx in range(nx):
            vertices[gy * nx + gx] = (
                margin + gx * spacing + rng.uniform(-jitter, jitter),
                margin + gy * spacing + rng.uniform(-jitter, jitter),
            )
    edges: set[tuple[int, int]] = set()
    for gy in range(ny):
        for gx in range(nx):
            i = gy * nx + gx
            if gx < nx - 1:
                edges.add((i, i + 1))
            if gy < ny - 1:
                edges.add((i, i + nx))

    degree = {i: 0 for i in vertices}
    for i, j in edges:
        degree[i] += 1
        degree[j] += 1
    removable = sorted(edges)
    rng.shuffle(removable)
    drops = rng.randint(0, len(removable) // 3)
    for i, j in removable:
        if drops == 0:
            break
        if degree[i] >= 4 and degree[j] >= 4:
            edges.discard((i, j))
            degree[i] -= 1
            degree[j] -= 1
            drops -= 1
    return StreetGraph(vertices=vertices, edges=edges, resolution=resolution)


def match_by_position(
    original: StreetGraph, extracted: StreetGraph, tol: float = 2.0
) -> dict[int, int] | None:
    """Positional isomorphism: a vertex bijection within tol px that maps
    the edge set exactly; None when there is none."""
    if len(original.vertices) != len(extracted.vertices):
        return None
    if len(original.edges) != len(extracted.edges):
        return None
    mapping: dict[int, int] = {}
    used: set[int] = set()
    for i, (x, y) in sorted(original.vertices.items()):
        best, best_d = None, None
        for j, (u, v) in sorted(extracted.vertices.items()):
            if j in used:
                continue
            d = math.hypot(u - x, v - y)
            if best_d is None or d < best_d:
                best, best_d = j, d
        if best is None or best_d > tol:
            return None
        mapping[i] = best
        used.add(best)
    mapped = {tuple(sorted((mapping[i], mapping[j]))) for i, j in original.edges}
    if mapped != set(extracted.edges):
        return None
    return mapping


@pytest.fixture
def plus_graph() -> StreetGraph:
    """Degree-4 center with four degree-1 leaves, 100 m arms."""
    return StreetGraph(
        vertices={
            0: (0.0, 0.0),
            1: (0.0, -100.0),
            2: (100.0, 0.0),
            3: (0.0, 100.0),
            4: (-100.0, 0.0),
        },
        edges={(0, 1), (0, 2), (0, 3), (0, 4)},
        unit="m",
    )


@pytest.fixture
def path3_graph() -> StreetGraph:
    """Three collinear vertices: degrees 1, 2, 1."""
    return StreetGraph(
        vertices={0: (0.0, 0.0), 1: (100.0, 0.0), 2: (200.0, 0.0)},
        edges={(0, 1), (1, 2)},
        unit="m",
    )


def grid4_graph() -> StreetGraph:
    """4x4 lattice of vertices with all rook edges, 100 m pitch."""
    vertices = {r * 4 + c: (c * 100.0, r * 100.0) for r in range(4) for c in range(4)}
    edges = set()
    for r in range(4):
        for c in range(4):
            i = r * 4 + c
            if c < 3:
                edges.add((i, i + 1))
            if r < 3:
                edges.add((i, i + 4))
    return StreetGraph(vertices=vertices, edges=edges, unit="m")
