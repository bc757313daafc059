"""Planar street graph construction from skeleton images, plus optimization.

A 1-px-wide skeleton is classified pixel by pixel into junction/endpoint
vertices and chain pixels, chains are traced into straight-segment edges,
and the raw graph is cleaned by corner-triangle removal and redundant-vertex
simplification.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace, asdict

import numpy as np

from .errors import ConfigurationError
from .raster import RasterPatch, EnhanceConfig, enhance, _neighborhood

LABEL_BACKGROUND = 0
LABEL_CHAIN = 1
LABEL_VERTEX = 2
LABEL_ISOLATED = 3

# (drow, dcol) scan order for neighbor probing; fixed so traversal is
# deterministic.
_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def _norm_edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass
class StreetGraph:
    """Planar graph of street segments.

    Vertex coordinates are (x, y) pairs; ``unit`` says whether they are
    pixels (convertible to meters via ``resolution``) or already Web
    Mercator meters. Edges are unordered id pairs, stored as (lo, hi).
    """

    vertices: dict[int, tuple[float, float]]
    edges: set[tuple[int, int]] = field(default_factory=set)
    resolution: float = 1.0
    georef: tuple[float, float] | None = None
    unit: str = "px"
    extent: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.unit not in ("px", "m"):
            raise ValueError(f"unknown coordinate unit {self.unit!r}")
        normalized = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop edge at vertex {i}")
            if i not in self.vertices or j not in self.vertices:
                raise ValueError(f"edge ({i}, {j}) references a missing vertex")
            normalized.add(_norm_edge(i, j))
        self.edges = normalized

    @property
    def meter_scale(self) -> float:
        """Multiplier from coordinate units to meters."""
        return self.resolution if self.unit == "px" else 1.0

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {i: set() for i in self.vertices}
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def degrees(self) -> dict[int, int]:
        deg = dict.fromkeys(self.vertices, 0)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def edge_length(self, edge: tuple[int, int]) -> float:
        (x1, y1), (x2, y2) = self.vertices[edge[0]], self.vertices[edge[1]]
        return math.hypot(x2 - x1, y2 - y1)

    def edge_length_m(self, edge: tuple[int, int]) -> float:
        return self.edge_length(edge) * self.meter_scale

    def total_length_m(self) -> float:
        return sum(self.edge_length_m(e) for e in sorted(self.edges))

    def copy(self) -> "StreetGraph":
        return replace(self, vertices=dict(self.vertices), edges=set(self.edges))

    def validate(self) -> None:
        """Check the full set of structural invariants; raises on violation."""
        seen_coords: dict[tuple[float, float], int] = {}
        for i, (x, y) in self.vertices.items():
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"vertex {i} has non-finite coordinates")
            if (x, y) in seen_coords:
                raise ValueError(f"vertices {seen_coords[(x, y)]} and {i} share coordinates")
            seen_coords[(x, y)] = i
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop edge at vertex {i}")
            if i not in self.vertices or j not in self.vertices:
                raise ValueError(f"edge ({i}, {j}) references a missing vertex")


@dataclass(frozen=True)
class PixelClassification:
    """Per-pixel labels for a skeleton: vertex / chain / isolated.

    ``criteria`` holds, for vertex pixels, which rule fired: 1 = single
    neighbor (endpoint), 2 = three or more neighbors (junction), 3 = two
    neighbors that do not line up straight (corner).
    """

    labels: np.ndarray
    criteria: np.ndarray

    def vertex_count(self, criterion: int | None = None) -> int:
        if criterion is None:
            return int((self.labels == LABEL_VERTEX).sum())
        return int((self.criteria == criterion).sum())


def classify_pixels(skeleton: RasterPatch) -> PixelClassification:
    """Label every street pixel as vertex, chain, or isolated.

    A pixel is a vertex if it has exactly one street neighbor, three or
    more, or exactly two that are not exact opposites of each other.
    Two opposite neighbors make a straight-through chain pixel.
    """
    if not skeleton.is_binary():
        raise ValueError("classify_pixels requires a binary (0/255) skeleton")
    fg = skeleton.foreground()
    padded = np.pad(fg, 1)
    n, ne, e, se, s, sw, w, nw = _neighborhood(padded)
    count = (
        n.astype(np.uint8) + ne + e + se + s + sw + w + nw
    )

    labels = np.zeros(fg.shape, dtype=np.uint8)
    criteria = np.zeros(fg.shape, dtype=np.uint8)

    labels[fg & (count == 0)] = LABEL_ISOLATED
    c1 = fg & (count == 1)
    c2 = fg & (count >= 3)
    two = fg & (count == 2)
    opposite = (n & s) | (e & w) | (ne & sw) | (se & nw)
    chain = two & opposite
    c3 = two & ~opposite

    labels[chain] = LABEL_CHAIN
    labels[c1 | c2 | c3] = LABEL_VERTEX
    criteria[c1] = 1
    criteria[c2] = 2
    criteria[c3] = 3
    return PixelClassification(labels=labels, criteria=criteria)


def _fg_neighbors(labels: np.ndarray, r: int, c: int) -> list[tuple[int, int]]:
    h, w = labels.shape
    out = []
    for dr, dc in _OFFSETS:
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w and labels[rr, cc] != LABEL_BACKGROUND:
            out.append((rr, cc))
    return out


def _promote_pure_cycles(labels: np.ndarray) -> None:
    """Give vertexless pixel cycles three promoted vertices so they survive.

    A closed ring of chain pixels has no junction or endpoint; without
    promotion it would be silently dropped and corrupt length metrics. Three
    promoted pixels (not two) keep the ring representable without self-loop
    or duplicate edges.
    """
    visited = np.zeros(labels.shape, dtype=bool)
    for r0, c0 in zip(*np.nonzero(labels != LABEL_BACKGROUND)):
        if visited[r0, c0]:
            continue
        component = []
        has_vertex = False
        stack = [(int(r0), int(c0))]
        visited[r0, c0] = True
        while stack:
            p = stack.pop()
            component.append(p)
            if labels[p] != LABEL_CHAIN:
                has_vertex = True
            for q in _fg_neighbors(labels, *p):
                if not visited[q]:
                    visited[q] = True
                    stack.append(q)
        if has_vertex:
            continue
        # Pure cycle: every pixel has exactly two neighbors. Walk it from its
        # scan-order-smallest pixel (r0, c0) and promote thirds of the ring.
        start = (int(r0), int(c0))
        order = [start]
        prev, cur = start, min(_fg_neighbors(labels, *start))
        while cur != start:
            order.append(cur)
            nbrs = _fg_neighbors(labels, *cur)
            nxt = nbrs[0] if nbrs[1] == prev else nbrs[1]
            prev, cur = cur, nxt
        length = len(order)
        for idx in {0, length // 3, (2 * length) // 3}:
            labels[order[idx]] = LABEL_VERTEX


def build_graph(skeleton: RasterPatch, classes: PixelClassification) -> StreetGraph:
    """Trace the classified skeleton into a planar graph.

    Mutually adjacent vertex pixels (junction blobs left by thinning) are
    collapsed to their centroid; each run of chain pixels between vertex
    pixels becomes one straight edge; isolated pixels are dropped.
    """
    fg = skeleton.foreground()
    if classes.labels.shape != fg.shape or ((classes.labels != LABEL_BACKGROUND) != fg).any():
        raise ValueError("classification does not match the skeleton")

    labels = classes.labels.copy()
    _promote_pure_cycles(labels)

    # Vertex-pixel clusters, in scan order so ids are deterministic.
    cluster_of: dict[tuple[int, int], int] = {}
    clusters: list[list[tuple[int, int]]] = []
    for r0, c0 in zip(*np.nonzero(labels == LABEL_VERTEX)):
        seed = (int(r0), int(c0))
        if seed in cluster_of:
            continue
        idx = len(clusters)
        members = [seed]
        cluster_of[seed] = idx
        stack = [seed]
        while stack:
            p = stack.pop()
            for q in _fg_neighbors(labels, *p):
                if labels[q] == LABEL_VERTEX and q not in cluster_of:
                    cluster_of[q] = idx
                    members.append(q)
                    stack.append(q)
        clusters.append(sorted(members))

    vertices: dict[int, tuple[float, float]] = {}
    for idx, members in enumerate(clusters):
        xs = [c for _, c in members]
        ys = [r for r, _ in members]
        vertices[idx] = (sum(xs) / len(xs), sum(ys) / len(ys))

    edges: set[tuple[int, int]] = set()
    next_id = len(clusters)
    visited_chain = np.zeros(labels.shape, dtype=bool)

    def add_pixel_vertex(p: tuple[int, int]) -> int:
        nonlocal next_id
        vid = next_id
        next_id += 1
        vertices[vid] = (float(p[1]), float(p[0]))
        return vid

    def emit_chain(start_cluster: int, path: list[tuple[int, int]], end_cluster: int) -> None:
        if start_cluster != end_cluster:
            edge = _norm_edge(start_cluster, end_cluster)
            if edge not in edges:
                edges.add(edge)
                return
            # Second distinct chain between the same pair: keep it routable
            # through a midpoint vertex instead of collapsing the two.
            mid = add_pixel_vertex(path[len(path) // 2])
            edges.add(_norm_edge(start_cluster, mid))
            edges.add(_norm_edge(mid, end_cluster))
            return
        # Chain loops back to its own cluster; a self-loop is not
        # representable, so split the loop at two interior pixels.
        if len(path) < 2:
            return
        a = add_pixel_vertex(path[len(path) // 3])
        b = add_pixel_vertex(path[(2 * len(path)) // 3])
        edges.add(_norm_edge(start_cluster, a))
        edges.add(_norm_edge(a, b))
        edges.add(_norm_edge(b, start_cluster))

    for ci, members in enumerate(clusters):
        for p in members:
            for dr, dc in _OFFSETS:
                q = (p[0] + dr, p[1] + dc)
                if not (0 <= q[0] < labels.shape[0] and 0 <= q[1] < labels.shape[1]):
                    continue
                lab = labels[q]
                if lab == LABEL_VERTEX:
                    cj = cluster_of[q]
                    if cj != ci:
                        edges.add(_norm_edge(ci, cj))
                elif lab == LABEL_CHAIN and not visited_chain[q]:
                    path = [q]
                    visited_chain[q] = True
                    prev, cur = p, q
                    while True:
                        nbrs = _fg_neighbors(labels, *cur)
                        nxt = nbrs[0] if nbrs[1] == prev else nbrs[1]
                        if labels[nxt] == LABEL_VERTEX:
                            emit_chain(ci, path, cluster_of[nxt])
                            break
                        path.append(nxt)
                        visited_chain[nxt] = True
                        prev, cur = cur, nxt

    return StreetGraph(
        vertices=vertices,
        edges=edges,
        resolution=skeleton.resolution,
        georef=skeleton.georef,
        unit="px",
        extent=(skeleton.width, skeleton.height),
    )


def remove_right_triangles(
    g: StreetGraph,
    leg_tolerance: float = 0.10,
    angle_tolerance_deg: float = 5.0,
) -> StreetGraph:
    """Drop the hypotenuse of every isosceles right triangle.

    A 3-cycle qualifies when its two shorter edges match in length within
    ``leg_tolerance`` (relative) and the angle between them is within
    ``angle_tolerance_deg`` of 90 degrees; its strictly longest edge is then
    removed. Repeats until no 3-cycle qualifies. Vertices are untouched.
    """
    out = g.copy()
    adj = out.adjacency()

    def side(i: int, j: int) -> tuple[float, tuple[int, int]]:
        return out.edge_length((i, j)), _norm_edge(i, j)

    while True:
        removed_any = False
        for u in sorted(adj):
            for v in sorted(adj[u]):
                if v <= u or v not in adj[u]:
                    continue
                for w in sorted(adj[u] & adj[v]):
                    if w <= v:
                        continue
                    sides = sorted((side(u, v), side(u, w), side(v, w)))
                    (la, _), (lb, eb), (lc, ec) = sides
                    if not lc > lb:
                        continue
                    if abs(lb - la) > leg_tolerance * lb:
                        continue
                    apex = next(k for k in (u, v, w) if k not in ec)
                    p, q = ec
                    ax, ay = out.vertices[apex]
                    v1 = (out.vertices[p][0] - ax, out.vertices[p][1] - ay)
                    v2 = (out.vertices[q][0] - ax, out.vertices[q][1] - ay)
                    cos = (v1[0] * v2[0] + v1[1] * v2[1]) / (math.hypot(*v1) * math.hypot(*v2))
                    angle = math.degrees(math.acos(max(-1.0, min(1.0, cos))))
                    if abs(angle - 90.0) <= angle_tolerance_deg:
                        out.edges.discard(ec)
                        adj[ec[0]].discard(ec[1])
                        adj[ec[1]].discard(ec[0])
                        removed_any = True
                        if ec == _norm_edge(u, v):
                            break
        if not removed_any:
            return out


def _point_segment_distance(
    p: tuple[float, float], a: tuple[float, float], b: tuple[float, float]
) -> float:
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    seg_sq = dx * dx + dy * dy
    if seg_sq == 0.0:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = max(0.0, min(1.0, ((p[0] - ax) * dx + (p[1] - ay) * dy) / seg_sq))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def _douglas_peucker(points: list[tuple[float, float]], epsilon: float) -> list[int]:
    """Indices of the points kept by Douglas-Peucker at tolerance epsilon."""
    last = len(points) - 1
    keep = {0, last}
    stack = [(0, last)]
    while stack:
        s, e = stack.pop()
        if e - s <= 1:
            continue
        best_d, best_i = -1.0, -1
        for i in range(s + 1, e):
            d = _point_segment_distance(points[i], points[s], points[e])
            if d > best_d:
                best_d, best_i = d, i
        if best_d > epsilon:
            keep.add(best_i)
            stack.append((s, best_i))
            stack.append((best_i, e))
    return sorted(keep)


def simplify(g: StreetGraph, epsilon: float = 1.0) -> StreetGraph:
    """Remove redundant degree-2 vertices and merge their edges.

    Each maximal run of degree-2 vertices is simplified with
    Douglas-Peucker: interior vertices deviating at most ``epsilon`` from
    the simplified chord are dropped. Endpoints (degree 1) and junctions
    (degree >= 3) always survive, as do enough vertices on closed rings to
    keep them representable.
    """
    if epsilon < 0:
        raise ConfigurationError(f"simplification epsilon must be >= 0, got {epsilon}")

    adj = g.adjacency()
    degree = {i: len(adj[i]) for i in adj}
    anchors = sorted(i for i in adj if degree[i] != 2)

    consumed: set[tuple[int, int]] = set()
    walks: list[list[int]] = []

    def trace(a: int, first: int) -> list[int]:
        walk = [a]
        consumed.add(_norm_edge(a, first))
        prev, cur = a, first
        while degree[cur] == 2:
            walk.append(cur)
            n1, n2 = sorted(adj[cur])
            nxt = n2 if n1 == prev else n1
            consumed.add(_norm_edge(cur, nxt))
            prev, cur = cur, nxt
            if cur == walk[0]:
                break
        walk.append(cur)
        return walk

    for a in anchors:
        for n in sorted(adj[a]):
            if _norm_edge(a, n) not in consumed:
                walks.append(trace(a, n))
    # Components made entirely of degree-2 vertices are closed rings; start
    # each at its smallest retained id so repeated runs agree.
    for i in sorted(adj):
        if degree[i] != 2:
            continue
        for n in sorted(adj[i]):
            if _norm_edge(i, n) not in consumed:
                walks.append(trace(i, n))

    kept_vertices: set[int] = set(anchors)
    new_edges: set[tuple[int, int]] = set()

    # Plain anchor-to-anchor edges go in first so a parallel degree-2 run
    # that collapses onto the same endpoints can see them and stay distinct.
    walks.sort(key=len)
    for walk in walks:
        pts = [g.vertices[v] for v in walk]
        keep_idx = _douglas_peucker(pts, epsilon)
        closed = walk[0] == walk[-1]
        interior = [i for i in keep_idx if 0 < i < len(walk) - 1]
        if closed and len(interior) < 2:
            # A ring needs at least two interior vertices to avoid self-loops
            # and duplicate edges; force the ones farthest from the start.
            ranked = sorted(
                range(1, len(walk) - 1),
                key=lambda i: (-_point_segment_distance(pts[i], pts[0], pts[0]), pts[i], i),
            )
            for i in ranked:
                if i not in interior:
                    interior.append(i)
                if len(interior) == 2:
                    break
            keep_idx = sorted({0, len(walk) - 1, *interior})
        elif not closed and not interior and _norm_edge(walk[0], walk[-1]) in new_edges:
            # Parallel run between the same endpoints: keep its most
            # deviating vertex so the two routes stay distinct.
            ranked = sorted(
                range(1, len(walk) - 1),
                key=lambda i: (-_point_segment_distance(pts[i], pts[0], pts[-1]), pts[i], i),
            )
            keep_idx = sorted({0, len(walk) - 1, ranked[0]})

        kept_ids = [walk[i] for i in keep_idx]
        kept_vertices.update(kept_ids)
        for a, b in zip(kept_ids[:-1], kept_ids[1:]):
            new_edges.add(_norm_edge(a, b))

    new_vertices = {i: g.vertices[i] for i in sorted(kept_vertices)}
    out = replace(g, vertices=new_vertices, edges=new_edges)

    removed = len(g.vertices) - len(new_vertices)
    before = sum(g.edge_length(e) for e in g.edges)
    after = sum(out.edge_length(e) for e in out.edges)
    assert before - after <= epsilon * removed + 1e-9 * max(1.0, before), (
        "simplification changed total length beyond the epsilon-per-vertex bound"
    )
    return out


@dataclass(frozen=True)
class ExtractConfig:
    """Parameters for the full image-to-graph extraction pipeline."""

    enhance: EnhanceConfig = EnhanceConfig()
    triangle_leg_tolerance: float = 0.10
    triangle_angle_tolerance_deg: float = 5.0
    simplify_epsilon: float = 1.0

    def to_dict(self) -> dict:
        return asdict(self)


def extract(img: RasterPatch, cfg: ExtractConfig | None = None) -> StreetGraph:
    """Full pipeline: enhance, classify, trace, and optimize a street graph."""
    cfg = cfg or ExtractConfig()
    skeleton = enhance(img, cfg.enhance)
    classes = classify_pixels(skeleton)
    g = build_graph(skeleton, classes)
    g = remove_right_triangles(g, cfg.triangle_leg_tolerance, cfg.triangle_angle_tolerance_deg)
    return simplify(g, cfg.simplify_epsilon)
