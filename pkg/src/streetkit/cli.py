"""Command-line front end: rasterize, extract, metrics, compare, pipeline.

Configuration precedence is flags > --config JSON file > built-in defaults,
and every output file echoes the effective configuration and seed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict, fields
from pathlib import Path

from . import geodata, graph_io, metrics, patch_io
from .errors import StreetKitError
from .graph import ExtractConfig, extract
from .metrics import MetricsConfig, MetricsReport
from .raster import EnhanceConfig


@dataclass
class PipelineConfig:
    """All tunable knobs of the pipeline, one flat namespace."""

    threshold: int = 127
    dilate_radius: int = 1
    dilate_iterations: int = 2
    rounds: int = 2
    triangle_leg_tolerance: float = 0.10
    triangle_angle_tolerance_deg: float = 5.0
    simplify_epsilon: float = 1.0
    pairs: int = 100
    min_pair_distance_m: float = 250.0
    reach_radius_m: float = 500.0
    reach_samples: int = 100
    patch_size: int = 512
    patch_resolution: float = 5.0
    stroke_width: int = 3
    seed: int = 0
    workers: int = 0  # 0 means one worker per CPU

    def __post_init__(self) -> None:
        for name in (
            "triangle_leg_tolerance",
            "triangle_angle_tolerance_deg",
            "simplify_epsilon",
            "min_pair_distance_m",
            "reach_radius_m",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    def enhance_config(self) -> EnhanceConfig:
        return EnhanceConfig(
            threshold=self.threshold,
            dilate_radius=self.dilate_radius,
            dilate_iterations=self.dilate_iterations,
            rounds=self.rounds,
        )

    def extract_config(self) -> ExtractConfig:
        return ExtractConfig(
            enhance=self.enhance_config(),
            triangle_leg_tolerance=self.triangle_leg_tolerance,
            triangle_angle_tolerance_deg=self.triangle_angle_tolerance_deg,
            simplify_epsilon=self.simplify_epsilon,
        )

    def metrics_config(self) -> MetricsConfig:
        return MetricsConfig(
            pairs=self.pairs,
            min_pair_distance_m=self.min_pair_distance_m,
            reach_radius_m=self.reach_radius_m,
            reach_samples=self.reach_samples,
            seed=self.seed,
        )

    def effective_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)


_CONFIG_FIELD_NAMES = {f.name for f in fields(PipelineConfig)}


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Merge defaults, --config file values, and explicit flags."""
    merged = asdict(PipelineConfig())
    config_path = getattr(args, "config", None)
    if config_path:
        file_values = json.loads(Path(config_path).read_text(encoding="utf-8"))
        unknown = set(file_values) - _CONFIG_FIELD_NAMES
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(file_values)
    for name in _CONFIG_FIELD_NAMES:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    return PipelineConfig(**merged)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file (flags override it)")
    parser.add_argument("--threshold", type=int)
    parser.add_argument("--dilate-radius", dest="dilate_radius", type=int)
    parser.add_argument("--dilate-iterations", dest="dilate_iterations", type=int)
    parser.add_argument("--rounds", type=int)
    parser.add_argument("--triangle-leg-tolerance", dest="triangle_leg_tolerance", type=float)
    parser.add_argument(
        "--triangle-angle-tolerance-deg", dest="triangle_angle_tolerance_deg", type=float
    )
    parser.add_argument("--simplify-epsilon", dest="simplify_epsilon", type=float)
    parser.add_argument("--pairs", type=int)
    parser.add_argument("--min-pair-distance-m", dest="min_pair_distance_m", type=float)
    parser.add_argument("--reach-radius-m", dest="reach_radius_m", type=float)
    parser.add_argument("--reach-samples", dest="reach_samples", type=int)
    parser.add_argument("--patch-size", dest="patch_size", type=int)
    parser.add_argument("--patch-resolution", dest="patch_resolution", type=float)
    parser.add_argument("--stroke-width", dest="stroke_width", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)


def _load_condition_sources(directory: Path) -> dict:
    sources = {}
    for name in geodata.CONDITION_LAYER_NAMES:
        base = directory / name
        if not base.with_suffix(".npy").exists():
            raise StreetKitError(f"{directory}: missing condition source {name}.npy/.json")
        sources[name] = geodata.load_raster_source(base)
    return sources


def cmd_rasterize(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    streets = geodata.load_streets_geojson(args.geojson)
    if not streets.polylines:
        raise StreetKitError(f"{args.geojson}: no street polylines found")
    allowed = frozenset(args.tags.split(",")) if args.tags else None
    streets = geodata.filter_highways(streets, allowed)
    if not streets.polylines:
        raise StreetKitError(f"{args.geojson}: no streets left after the highway filter")
    streets = geodata.project_web_mercator(streets)
    sources = _load_condition_sources(Path(args.condition_sources)) if args.condition_sources else None

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    patches = geodata.crop_patches(
        streets,
        size=cfg.patch_size,
        resolution=cfg.patch_resolution,
        stroke_width=cfg.stroke_width,
    )
    window = cfg.patch_size * cfg.patch_resolution
    entries = []
    for spec, patch in patches:
        ix = round(spec.origin[0] / window)
        iy = round(spec.origin[1] / window) - 1
        patch_id = f"patch_x{ix}_y{iy}"
        png_path = out_dir / f"{patch_id}.png"
        patch_io.save_png(
            patch, png_path, metadata={"config": cfg.to_dict(), "patch_id": patch_id}
        )
        entry = {
            "id": patch_id,
            "origin": list(spec.origin),
            "size": spec.size,
            "resolution": spec.resolution,
            "stroke_width": spec.stroke_width,
            "street_image": png_path.name,
        }
        if sources is not None:
            conditions = geodata.align_condition_layers(spec, sources)
            entry["layers"] = {}
            for name in geodata.CONDITION_LAYER_NAMES:
                layer_path = out_dir / f"{patch_id}_{name}.png"
                patch_io.save_png(
                    conditions.layer(name),
                    layer_path,
                    metadata={"config": cfg.to_dict(), "patch_id": patch_id, "layer": name},
                )
                entry["layers"][name] = layer_path.name
            entry["layer_ranges"] = {k: list(v) for k, v in conditions.ranges.items()}
        entries.append(entry)
    manifest = {"patches": entries, "config": cfg.to_dict(), "seed": cfg.seed}
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(entries)} patch(es) and manifest.json to {out_dir}")
    return 0


def _extract_one(image_path: Path, out_dir: Path, cfg: PipelineConfig) -> Path:
    patch = patch_io.load_image(image_path)
    g = extract(patch, cfg.extract_config())
    out_path = out_dir / (image_path.stem + ".graph.geojson")
    graph_io.save_geojson(
        g,
        out_path,
        metadata={"config": cfg.to_dict(), "seed": cfg.seed, "source": image_path.name},
    )
    return out_path


def cmd_extract(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for image in args.images:
        path = _extract_one(Path(image), out_dir, cfg)
        print(f"extracted {image} -> {path}")
    return 0


def _metrics_one(graph_path: Path, out_dir: Path, cfg: PipelineConfig) -> Path:
    g = graph_io.load_geojson(graph_path)
    rep = metrics.report(g, cfg.metrics_config())
    name = graph_path.name
    for suffix in (".graph.geojson", ".geojson"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
            break
    out_path = out_dir / f"{name}.metrics.json"
    out_path.write_text(
        metrics.report_to_json(rep, config=cfg.to_dict()), encoding="utf-8"
    )
    return out_path


def cmd_metrics(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    for graph_file in args.graphs:
        graph_path = Path(graph_file)
        out_dir = Path(args.out) if args.out else graph_path.parent
        out_dir.mkdir(parents=True, exist_ok=True)
        out_path = _metrics_one(graph_path, out_dir, cfg)
        print(f"metrics {graph_file} -> {out_path}")
    return 0


def _load_report_dir(path: Path) -> list[MetricsReport]:
    reports = []
    for report_path in sorted(path.glob("*.metrics.json")):
        data = json.loads(report_path.read_text(encoding="utf-8"))
        reports.append(MetricsReport.from_json_dict(data))
    return reports


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    corpus_a = _load_report_dir(Path(args.dir_a))
    corpus_b = _load_report_dir(Path(args.dir_b))
    comparison = metrics.compare(corpus_a, corpus_b)
    comparison["config"] = cfg.to_dict()
    comparison["seed"] = cfg.seed
    out_path = Path(args.out) if args.out else Path("comparison.json")
    out_path.write_text(
        json.dumps(comparison, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"comparison -> {out_path}")
    if args.plot:
        metrics.plot_comparison(comparison, args.plot)
        print(f"plot -> {args.plot}")
    return 0


def _pipeline_worker(job: tuple[str, str, str, dict]) -> tuple[str, str, dict]:
    image, graphs_dir, reports_dir, cfg_dict = job
    cfg = PipelineConfig(**cfg_dict)
    image_path = Path(image)
    graph_path = _extract_one(image_path, Path(graphs_dir), cfg)
    report_path = _metrics_one(graph_path, Path(reports_dir), cfg)
    report_data = json.loads(report_path.read_text(encoding="utf-8"))
    return str(graph_path), str(report_path), report_data


def cmd_pipeline(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    image_dir = Path(args.images)
    images = sorted(
        p for p in image_dir.glob("*") if p.suffix.lower() in (".png", ".pgm")
    )
    if not images:
        raise StreetKitError(f"{image_dir}: no .png or .pgm images found")

    out_dir = Path(args.out)
    graphs_dir = out_dir / "graphs"
    reports_dir = out_dir / "reports"
    graphs_dir.mkdir(parents=True, exist_ok=True)
    reports_dir.mkdir(parents=True, exist_ok=True)

    jobs = [(str(p), str(graphs_dir), str(reports_dir), cfg.to_dict()) for p in images]
    workers = min(cfg.effective_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_pipeline_worker, jobs))
    else:
        results = [_pipeline_worker(job) for job in jobs]

    reports = [MetricsReport.from_json_dict(r[2]) for r in results]
    summary: dict = {
        "inputs": [p.name for p in images],
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "metrics": {},
    }
    for key in metrics.METRIC_KEYS:
        values = [getattr(r, key) for r in reports if getattr(r, key) is not None]
        summary["metrics"][key] = metrics._summary(values) if values else None
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"pipeline: {len(images)} image(s) -> {out_dir} (graphs, reports, summary.json)")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streetkit",
        description="Street-layout rasters to planar street graphs, metrics, and datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rasterize", help="tile a GeoJSON street network into patch rasters")
    p.add_argument("geojson", help="input GeoJSON of streets (highway property per feature)")
    p.add_argument("--out", required=True, help="output directory for patches + manifest")
    p.add_argument("--tags", help="comma-separated highway tags to keep (default: standard set)")
    p.add_argument(
        "--condition-sources",
        dest="condition_sources",
        help="directory of elevation/population/landuse .npy+.json sources to "
        "resample per patch into manifest layers",
    )
    _add_config_flags(p)
    p.set_defaults(func=cmd_rasterize)

    p = sub.add_parser("extract", help="extract street graphs from raster images")
    p.add_argument("images", nargs="+", help="input PNG/PGM images")
    p.add_argument("--out", required=True, help="output directory for graph GeoJSON files")
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("metrics", help="compute the metric suite for graph files")
    p.add_argument("graphs", nargs="+", help="input graph GeoJSON files")
    p.add_argument("--out", help="output directory (default: next to each input)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compare", help="compare metric distributions of two report dirs")
    p.add_argument("dir_a", help="directory of *.metrics.json reports")
    p.add_argument("dir_b", help="directory of *.metrics.json reports")
    p.add_argument("--out", help="output JSON path (default: comparison.json)")
    p.add_argument("--plot", help="optional PNG path for histogram panels")
    _add_config_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", help="extract + metrics + summary for an image directory")
    p.add_argument("images", help="directory of PNG/PGM images")
    p.add_argument("--out", required=True, help="output directory")
    _add_config_flags(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (StreetKitError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
