"""Graph construction from skeletons and the two optimization passes."""
from __future__ import annotations

import math
import random

import numpy as np
import pytest

from streetkit import (
    ConfigurationError,
    PatchSpec,
    StreetGraph,
    build_graph,
    classify_pixels,
    extract,
    rasterize,
    remove_right_triangles,
    simplify,
)
from streetkit.graph import (
    LABEL_CHAIN,
    LABEL_ISOLATED,
    LABEL_VERTEX,
)

from conftest import blank, grid_street_graph, make_patch, match_by_position


def _single_pixel_context(neighbors: list[tuple[int, int]]):
    """9x9 fixture with a center pixel at (4,4) plus the given neighbor offsets."""
    img = blank(9, 9)
    img[4, 4] = 255
    for dr, dc in neighbors:
        img[4 + dr, 4 + dc] = 255
    return make_patch(img)


class TestClassifyPixels:
    def test_opposite_neighbors_make_chain(self):
        classes = classify_pixels(_single_pixel_context([(0, 1), (0, -1)]))
        assert classes.labels[4, 4] == LABEL_CHAIN

    def test_corner_is_vertex_criterion_3(self):
        classes = classify_pixels(_single_pixel_context([(-1, 0), (0, 1)]))
        assert classes.labels[4, 4] == LABEL_VERTEX
        assert classes.criteria[4, 4] == 3

    def test_t_junction_is_vertex_criterion_2(self):
        classes = classify_pixels(_single_pixel_context([(-1, 0), (1, 0), (0, 1)]))
        assert classes.labels[4, 4] == LABEL_VERTEX
        assert classes.criteria[4, 4] == 2

    def test_endpoint_is_vertex_criterion_1(self):
        classes = classify_pixels(_single_pixel_context([(0, 1)]))
        assert classes.labels[4, 4] == LABEL_VERTEX
        assert classes.criteria[4, 4] == 1

    def test_isolated_pixel(self):
        classes = classify_pixels(_single_pixel_context([]))
        assert classes.labels[4, 4] == LABEL_ISOLATED

    def test_diagonal_chain(self):
        classes = classify_pixels(_single_pixel_context([(-1, -1), (1, 1)]))
        assert classes.labels[4, 4] == LABEL_CHAIN

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            classify_pixels(make_patch(np.full((5, 5), 7, dtype=np.uint8)))

    def test_rendered_segment_has_two_endpoints(self):
        img = blank(9, 30)
        img[4, 3:27] = 255
        classes = classify_pixels(make_patch(img))
        assert classes.vertex_count(1) == 2
        assert classes.vertex_count() == 2


class TestBuildGraph:
    def test_plus_pattern(self):
        img = blank(21, 21)
        img[10, 7:14] = 255
        img[7:14, 10] = 255
        patch = make_patch(img)
        g = build_graph(patch, classify_pixels(patch))
        g.validate()
        assert len(g.vertices) == 5
        assert len(g.edges) == 4
        degs = sorted(g.degrees().values())
        assert degs == [1, 1, 1, 1, 4]

    def test_straight_line(self):
        img = blank(5, 20)
        img[2, 5:15] = 255
        patch = make_patch(img)
        g = build_graph(patch, classify_pixels(patch))
        assert len(g.vertices) == 2
        assert len(g.edges) == 1
        assert g.edge_length(next(iter(g.edges))) == pytest.approx(9.0)

    def test_empty_skeleton(self):
        patch = make_patch(blank(9, 9))
        g = build_graph(patch, classify_pixels(patch))
        assert not g.vertices and not g.edges

    def test_isolated_pixels_dropped(self):
        img = blank(9, 9)
        img[2, 2] = 255
        img[6, 6] = 255
        patch = make_patch(img)
        g = build_graph(patch, classify_pixels(patch))
        assert not g.vertices

    def test_pure_cycle_survives(self):
        # diagonal diamond: every pixel has exactly two opposite-ish
        # neighbors, several of them collinear chains, none a junction
        img = blank(11, 11)
        ring = [(2, 5), (3, 6), (4, 7), (5, 6), (6, 5), (5, 4), (4, 3), (3, 4)]
        for r, c in ring:
            img[r, c] = 255
        patch = make_patch(img)
        classes = classify_pixels(patch)
        g = build_graph(patch, classes)
        g.validate()
        assert len(g.vertices) >= 3
        assert len(g.edges) == len(g.vertices), "a single cycle has |V| == |E|"
        assert all(d == 2 for d in g.degrees().values())

    def test_mismatched_classification_rejected(self):
        img = blank(9, 9)
        img[4, 4] = 255
        patch = make_patch(img)
        classes = classify_pixels(make_patch(blank(9, 9)))
        with pytest.raises(ValueError):
            build_graph(patch, classes)

    def test_edge_count_matches_flood_fill_oracle(self):
        # independent oracle: one edge per 8-connected chain-pixel run plus
        # one per adjacent vertex-cluster pair
        for seed in range(10):
            g0 = grid_street_graph(seed)
            spec = PatchSpec(size=192, resolution=5.0, stroke_width=3, origin=(0.0, 0.0))
            patch = rasterize(g0, spec)
            from streetkit import enhance

            skeleton = enhance(patch)
            classes = classify_pixels(skeleton)
            g = build_graph(skeleton, classes)

            labels = classes.labels
            chain_runs = _count_label_components(labels, LABEL_CHAIN)
            cluster_ids = _label_components(labels, LABEL_VERTEX)
            direct = set()
            h, w = labels.shape
            for (r, c), cid in cluster_ids.items():
                for dr in (-1, 0, 1):
                    for dc in (-1, 0, 1):
                        q = (r + dr, c + dc)
                        other = cluster_ids.get(q)
                        if other is not None and other != cid:
                            direct.add(tuple(sorted((cid, other))))
            assert len(g.edges) == chain_runs + len(direct), f"seed {seed}"


def _label_components(labels: np.ndarray, which: int) -> dict[tuple[int, int], int]:
    out: dict[tuple[int, int], int] = {}
    nxt = 0
    h, w = labels.shape
    for r0, c0 in zip(*np.nonzero(labels == which)):
        seed = (int(r0), int(c0))
        if seed in out:
            continue
        stack = [seed]
        out[seed] = nxt
        while stack:
            r, c = stack.pop()
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    q = (r + dr, c + dc)
                    if (
                        0 <= q[0] < h
                        and 0 <= q[1] < w
                        and labels[q] == which
                        and q not in out
                    ):
                        out[q] = nxt
                        stack.append(q)
        nxt += 1
    return out


def _count_label_components(labels: np.ndarray, which: int) -> int:
    ids = _label_components(labels, which)
    return len(set(ids.values())) if ids else 0


def _triangle(coords, extra_vertices=(), extra_edges=()) -> StreetGraph:
    vertices = {i: xy for i, xy in enumerate(coords)}
    edges = {(0, 1), (0, 2), (1, 2)}
    for i, xy in extra_vertices:
        vertices[i] = xy
    edges.update(extra_edges)
    return StreetGraph(vertices=vertices, edges=edges)


class TestRemoveRightTriangles:
    def test_unit_isosceles_right_triangle(self):
        g = _triangle([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
        out = remove_right_triangles(g)
        assert out.edges == {(0, 1), (0, 2)}, "only the hypotenuse goes"
        assert out.vertices == g.vertices

    def test_equilateral_untouched(self):
        h = math.sqrt(3)
        g = _triangle([(0.0, 0.0), (2.0, 0.0), (1.0, h)])
        out = remove_right_triangles(g)
        assert out.edges == g.edges

    def test_two_triangles_sharing_a_leg(self):
        # triangles (0,1,2) and (0,1,3) share leg 0-1; both hypotenuses fall
        g = StreetGraph(
            vertices={0: (0.0, 0.0), 1: (1.0, 0.0), 2: (0.0, 1.0), 3: (1.0, -1.0)},
            edges={(0, 1), (0, 2), (1, 2), (1, 3), (0, 3)},
        )
        out = remove_right_triangles(g)
        assert (1, 2) not in out.edges
        assert (0, 3) not in out.edges
        assert out.edges == {(0, 1), (0, 2), (1, 3)}

    def test_skewed_legs_not_removed(self):
        # legs differ by 50%: not isosceles
        g = _triangle([(0.0, 0.0), (1.0, 0.0), (0.0, 1.5)])
        out = remove_right_triangles(g)
        assert out.edges == g.edges

    def test_never_increases_edges_never_moves_vertices(self):
        for seed in range(10):
            g = grid_street_graph(seed)
            out = remove_right_triangles(g)
            assert len(out.edges) <= len(g.edges)
            assert out.vertices == g.vertices


class TestSimplify:
    def test_collinear_interior_vertex_removed(self):
        g = StreetGraph(
            vertices={0: (0.0, 0.0), 1: (5.0, 0.0), 2: (10.0, 0.0)},
            edges={(0, 1), (1, 2)},
        )
        out = simplify(g, 1.0)
        assert set(out.vertices) == {0, 2}
        assert out.edges == {(0, 2)}

    def test_large_deviation_kept(self):
        # deviation of (5,3) from the chord is 3.0 > 1.0
        g = StreetGraph(
            vertices={0: (0.0, 0.0), 1: (5.0, 3.0), 2: (10.0, 0.0)},
            edges={(0, 1), (1, 2)},
        )
        out = simplify(g, 1.0)
        assert set(out.vertices) == {0, 1, 2}
        assert out.edges == g.edges

    def test_no_degree_two_vertices_unchanged(self, plus_graph):
        out = simplify(plus_graph, 1.0)
        assert out.vertices == plus_graph.vertices
        assert out.edges == plus_graph.edges

    def test_negative_epsilon_rejected(self, plus_graph):
        with pytest.raises(ConfigurationError):
            simplify(plus_graph, -0.5)

    def test_ring_survives(self):
        # square ring of 8 degree-2 vertices collapses to >= 3 vertices
        pts = [(0, 0), (5, 0), (10, 0), (10, 5), (10, 10), (5, 10), (0, 10), (0, 5)]
        vertices = {i: (float(x), float(y)) for i, (x, y) in enumerate(pts)}
        edges = {(i, (i + 1) % 8) for i in range(8)}
        g = StreetGraph(vertices=vertices, edges=edges)
        out = simplify(g, 1.0)
        out.validate()
        assert len(out.vertices) >= 3
        assert len(out.edges) == len(out.vertices)
        assert all(d == 2 for d in out.degrees().values())

    def test_idempotent(self):
        rng = random.Random(5)
        for seed in range(10):
            g = grid_street_graph(seed)
            # sprinkle collinear-ish interior vertices into some edges
            next_id = max(g.vertices) + 1
            edges = set(g.edges)
            for i, j in sorted(g.edges)[:6]:
                edges.discard((i, j))
                (x1, y1), (x2, y2) = g.vertices[i], g.vertices[j]
                mx = (x1 + x2) / 2 + rng.uniform(-0.8, 0.8)
                my = (y1 + y2) / 2 + rng.uniform(-0.8, 0.8)
                g.vertices[next_id] = (mx, my)
                edges.add((i, next_id))
                edges.add((next_id, j))
                next_id += 1
            g2 = StreetGraph(vertices=dict(g.vertices), edges=edges)
            once = simplify(g2, 1.0)
            twice = simplify(once, 1.0)
            assert once.vertices == twice.vertices, f"seed {seed}"
            assert once.edges == twice.edges, f"seed {seed}"


class TestExtract:
    def test_plus_round_trip(self):
        g0 = StreetGraph(
            vertices={
                0: (32.0, 32.0),
                1: (32.0, 8.0),
                2: (56.0, 32.0),
                3: (32.0, 56.0),
                4: (8.0, 32.0),
            },
            edges={(0, 1), (0, 2), (0, 3), (0, 4)},
            resolution=5.0,
        )
        spec = PatchSpec(size=64, resolution=5.0, stroke_width=3, origin=(0.0, 0.0))
        out = extract(rasterize(g0, spec))
        out.validate()
        mapping = match_by_position(g0, out, tol=2.0)
        assert mapping is not None, "extracted graph must be isomorphic within 2 px"

    def test_all_zero_image(self):
        out = extract(make_patch(blank(64, 64)))
        assert not out.vertices and not out.edges

    def test_grid_of_blocks(self):
        vertices = {}
        k = 0
        for gy in range(3):
            for gx in range(3):
                vertices[k] = (12.0 + gx * 24, 12.0 + gy * 24)
                k += 1
        edges = set()
        for gy in range(3):
            for gx in range(3):
                i = gy * 3 + gx
                if gx < 2:
                    edges.add((i, i + 1))
                if gy < 2:
                    edges.add((i, i + 3))
        g0 = StreetGraph(vertices=vertices, edges=edges, resolution=5.0)
        spec = PatchSpec(size=72, resolution=5.0, stroke_width=3, origin=(0.0, 0.0))
        out = extract(rasterize(g0, spec))
        assert len(out.vertices) == 9
        assert len(out.edges) == 12

    def test_extent_and_georef_carried(self):
        img = blank(32, 48)
        patch = make_patch(img, resolution=5.0, georef=(1000.0, 2000.0))
        out = extract(patch)
        assert out.extent == (48, 32)
        assert out.georef == (1000.0, 2000.0)
        assert out.resolution == 5.0


class TestStreetGraphInvariants:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            StreetGraph(vertices={0: (0.0, 0.0)}, edges={(0, 0)})

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(ValueError):
            StreetGraph(vertices={0: (0.0, 0.0)}, edges={(0, 1)})

    def test_duplicate_coordinates_detected(self):
        g = StreetGraph(vertices={0: (1.0, 1.0), 1: (1.0, 1.0)}, edges=set())
        with pytest.raises(ValueError):
            g.validate()

    def test_edges_normalized(self):
        g = StreetGraph(vertices={0: (0.0, 0.0), 1: (1.0, 0.0)}, edges={(1, 0)})
        assert g.edges == {(0, 1)}
