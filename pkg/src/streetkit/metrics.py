"""Street-graph statistics: connectivity, density, length, and accessibility.

All distance-based metrics work in meters (pixel coordinates are scaled by
the graph resolution) and report kilometers where noted. Sampled metrics are
pure functions of (graph, parameters, seed).
"""
from __future__ import annotations

import heapq
import json
import math
import random
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import EmptyCorpusError, EmptyGraphError, NoValidPairsError
from .graph import StreetGraph

# Planning guidelines commonly require at least this connectivity index.
GUIDELINE_MIN_CONNECTIVITY = 1.4


def connectivity_index(g: StreetGraph) -> float:
    """Mean degree over vertices whose degree differs from 2.

    Pass-through (degree 2) vertices carry no junction information and are
    excluded; raises EmptyGraphError when nothing qualifies.
    """
    degrees = [d for d in g.degrees().values() if d != 2]
    if not degrees:
        raise EmptyGraphError("no vertex with degree != 2")
    return sum(degrees) / len(degrees)


def mean_degree(g: StreetGraph) -> float:
    """Plain average vertex degree, no filtering."""
    degrees = g.degrees()
    if not degrees:
        raise EmptyGraphError("graph has no vertices")
    return sum(degrees.values()) / len(degrees)


def intersection_density(g: StreetGraph) -> tuple[int, float | None]:
    """Count of vertices with degree > 2, and per-km2 density when the
    source patch extent is known."""
    count = sum(1 for d in g.degrees().values() if d > 2)
    if g.extent is None:
        return count, None
    width, height = g.extent
    area_km2 = width * height * g.resolution**2 / 1e6
    return count, count / area_km2 if area_km2 > 0 else None


def total_street_length(g: StreetGraph) -> float:
    """Sum of straight-segment edge lengths, in kilometers."""
    return g.total_length_m() / 1000.0


def network_distances(g: StreetGraph, source: int, cutoff_m: float | None = None) -> dict[int, float]:
    """Dijkstra shortest-path distances (meters) from a source vertex.

    Edge weights are Euclidean segment lengths in meters; vertices beyond
    ``cutoff_m`` are omitted when a cutoff is given.
    """
    adj = g.adjacency()
    scale = g.meter_scale
    dist = {source: 0.0}
    heap = [(0.0, source)]
    done: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        ux, uy = g.vertices[u]
        for v in adj[u]:
            if v in done:
                continue
            vx, vy = g.vertices[v]
            nd = d + math.hypot(vx - ux, vy - uy) * scale
            if cutoff_m is not None and nd > cutoff_m:
                continue
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


@dataclass(frozen=True)
class SamplePair:
    """One sampled source/destination pair for the convenience metric."""

    source: int
    dest: int
    euclidean_m: float
    network_m: float | None  # None when the pair is disconnected


def _euclidean_m(g: StreetGraph, i: int, j: int) -> float:
    (x1, y1), (x2, y2) = g.vertices[i], g.vertices[j]
    return math.hypot(x2 - x1, y2 - y1) * g.meter_scale


def sample_pairs(
    g: StreetGraph, pairs: int, min_distance_m: float, seed: int
) -> list[tuple[int, int]]:
    """Uniform seeded vertex pairs with Euclidean separation above the floor.

    Rejection sampling with a bounded attempt budget; raises
    NoValidPairsError when no qualifying pair exists at all.
    """
    ids = sorted(g.vertices)
    if len(ids) < 2:
        raise NoValidPairsError("graph has fewer than 2 vertices")
    rng = random.Random(seed)
    accepted: list[tuple[int, int]] = []
    budget = max(1000, 200 * pairs)
    for _ in range(budget):
        if len(accepted) == pairs:
            break
        s, d = rng.sample(ids, 2)
        if _euclidean_m(g, s, d) > min_distance_m:
            accepted.append((s, d))
    if not accepted:
        # Rejection sampling found nothing; fall back to a deterministic scan
        # so rare valid pairs are still used, and raise only when none exist.
        accepted = [
            (a, b)
            for ai, a in enumerate(ids)
            for b in ids[ai + 1 :]
            if _euclidean_m(g, a, b) > min_distance_m
        ][:pairs]
        if not accepted:
            raise NoValidPairsError(
                f"no vertex pair is separated by more than {min_distance_m} m"
            )
    return accepted


def transportation_convenience(
    g: StreetGraph,
    pairs: int = 100,
    min_distance_m: float = 250.0,
    seed: int = 0,
) -> tuple[float, list[SamplePair]]:
    """Mean ratio of straight-line to network distance over sampled pairs.

    Disconnected pairs contribute 0, so fragmentation lowers the score.
    Returns the mean and the per-pair sample detail.
    """
    chosen = sample_pairs(g, pairs, min_distance_m, seed)
    detail: list[SamplePair] = []
    total = 0.0
    dist_cache: dict[int, dict[int, float]] = {}
    for s, d in chosen:
        if s not in dist_cache:
            dist_cache[s] = network_distances(g, s)
        de = _euclidean_m(g, s, d)
        dn = dist_cache[s].get(d)
        detail.append(SamplePair(source=s, dest=d, euclidean_m=de, network_m=dn))
        if dn is not None and dn > 0:
            total += min(1.0, de / dn)
    return total / len(chosen), detail


def reach_from_vertex(g: StreetGraph, source: int, radius_m: float = 500.0) -> float:
    """Street length (km) reachable within a network radius of one vertex.

    Shortest paths expand outward from the source; a frontier edge is
    credited with the portion reachable from either end, counted once.
    """
    dist = network_distances(g, source, cutoff_m=radius_m)
    reach_m = 0.0
    for i, j in sorted(g.edges):
        length = g.edge_length_m((i, j))
        from_i = min(length, radius_m - dist[i]) if i in dist else 0.0
        from_j = min(length, radius_m - dist[j]) if j in dist else 0.0
        reach_m += min(length, max(0.0, from_i) + max(0.0, from_j))
    return reach_m / 1000.0


def metric_reach(
    g: StreetGraph,
    radius_m: float = 500.0,
    samples: int = 100,
    seed: int = 0,
) -> float:
    """Mean reachable street length (km) over seeded source vertices."""
    ids = sorted(g.vertices)
    if not ids:
        raise EmptyGraphError("graph has no vertices")
    rng = random.Random(seed)
    k = min(len(ids), samples)
    sources = sorted(rng.sample(ids, k))
    return sum(reach_from_vertex(g, src, radius_m) for src in sources) / k


@dataclass
class MetricsConfig:
    """Sampling parameters shared by the metric suite."""

    pairs: int = 100
    min_pair_distance_m: float = 250.0
    reach_radius_m: float = 500.0
    reach_samples: int = 100
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MetricsReport:
    """The five metric values plus sampling metadata for one graph."""

    t_ci: float | None = None
    t_ci_unfiltered: float | None = None
    t_ci_below_guideline: bool | None = None
    t_id: int = 0
    t_id_per_km2: float | None = None
    g_sl_km: float = 0.0
    g_tc: float | None = None
    g_mr_km: float | None = None
    seed: int = 0
    pair_count_used: int = 0
    errors: dict[str, str] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, data: dict) -> "MetricsReport":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)


def report(g: StreetGraph, cfg: MetricsConfig | None = None) -> MetricsReport:
    """Run the full metric suite; failures annotate instead of raising."""
    cfg = cfg or MetricsConfig()
    rep = MetricsReport(seed=cfg.seed)

    try:
        rep.t_ci = connectivity_index(g)
        rep.t_ci_below_guideline = rep.t_ci < GUIDELINE_MIN_CONNECTIVITY
    except EmptyGraphError as exc:
        rep.errors["t_ci"] = str(exc)
    try:
        rep.t_ci_unfiltered = mean_degree(g)
    except EmptyGraphError as exc:
        rep.errors["t_ci_unfiltered"] = str(exc)

    rep.t_id, rep.t_id_per_km2 = intersection_density(g)
    rep.g_sl_km = total_street_length(g)

    try:
        value, detail = transportation_convenience(
            g, pairs=cfg.pairs, min_distance_m=cfg.min_pair_distance_m, seed=cfg.seed
        )
        rep.g_tc = value
        rep.pair_count_used = len(detail)
    except NoValidPairsError as exc:
        rep.errors["g_tc"] = str(exc)

    try:
        rep.g_mr_km = metric_reach(
            g, radius_m=cfg.reach_radius_m, samples=cfg.reach_samples, seed=cfg.seed
        )
    except EmptyGraphError as exc:
        rep.errors["g_mr"] = str(exc)

    return rep


METRIC_KEYS = ("t_ci", "t_id", "g_sl_km", "g_tc", "g_mr_km")


def ks_statistic(a: list[float], b: list[float]) -> float:
    """Two-sample Kolmogorov-Smirnov statistic: sup |ECDF_a - ECDF_b|."""
    if not a or not b:
        raise EmptyCorpusError("KS statistic needs two non-empty samples")
    xs = np.sort(np.asarray(a, dtype=float))
    ys = np.sort(np.asarray(b, dtype=float))
    pooled = np.concatenate([xs, ys])
    cdf_a = np.searchsorted(xs, pooled, side="right") / len(xs)
    cdf_b = np.searchsorted(ys, pooled, side="right") / len(ys)
    return float(np.abs(cdf_a - cdf_b).max())


def _summary(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    return {
        "mean": float(arr.mean()),
        "std": float(arr.std()),
        "min": float(arr.min()),
        "max": float(arr.max()),
        "count": int(arr.size),
    }


def compare(
    corpus_a: list[MetricsReport],
    corpus_b: list[MetricsReport],
    bins: int = 20,
) -> dict:
    """Distribution comparison of two report corpora, per metric.

    Emits summary stats, a fixed-bin histogram over the pooled range, and
    the two-sample KS statistic for each metric with data on both sides.
    """
    if not corpus_a or not corpus_b:
        raise EmptyCorpusError("both corpora must be non-empty")

    result: dict = {"metrics": {}, "corpus_sizes": [len(corpus_a), len(corpus_b)]}
    for key in METRIC_KEYS:
        va = [getattr(r, key) for r in corpus_a if getattr(r, key) is not None]
        vb = [getattr(r, key) for r in corpus_b if getattr(r, key) is not None]
        entry: dict = {
            "a": _summary(va) if va else None,
            "b": _summary(vb) if vb else None,
        }
        if va and vb:
            lo = min(min(va), min(vb))
            hi = max(max(va), max(vb))
            if hi == lo:
                hi = lo + 1.0
            edges = np.linspace(lo, hi, bins + 1)
            entry["histogram"] = {
                "edges": [float(x) for x in edges],
                "a": [int(c) for c in np.histogram(va, bins=edges)[0]],
                "b": [int(c) for c in np.histogram(vb, bins=edges)[0]],
            }
            entry["ks"] = ks_statistic(va, vb)
        result["metrics"][key] = entry
    return result


def plot_comparison(comparison: dict, path: str) -> None:
    """Render per-metric histogram panels to a PNG; needs matplotlib."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    keys = [k for k, v in comparison["metrics"].items() if v.get("histogram")]
    if not keys:
        raise EmptyCorpusError("nothing to plot: no metric has data in both corpora")
    fig, axes = plt.subplots(1, len(keys), figsize=(4 * len(keys), 3.2))
    if len(keys) == 1:
        axes = [axes]
    for ax, key in zip(axes, keys):
        hist = comparison["metrics"][key]["histogram"]
        edges = hist["edges"]
        centers = [(a + b) / 2 for a, b in zip(edges[:-1], edges[1:])]
        width = (edges[1] - edges[0]) * 0.9
        ax.bar(centers, hist["a"], width=width, alpha=0.6, color="tab:blue", label="a")
        ax.bar(centers, hist["b"], width=width, alpha=0.6, color="tab:orange", label="b")
        ks = comparison["metrics"][key].get("ks")
        ax.set_title(f"{key} (KS={ks:.3f})" if ks is not None else key)
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def report_to_json(rep: MetricsReport, config: dict | None = None) -> str:
    """Stable JSON encoding of a report, with the effective config echoed."""
    payload = rep.to_json_dict()
    if config is not None:
        payload["config"] = config
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
