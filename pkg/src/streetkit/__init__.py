"""streetkit: street-layout rasters to planar street graphs and metrics."""
from .errors import (
    ConfigurationError,
    EmptyCorpusError,
    EmptyGraphError,
    LatitudeOutOfRangeError,
    MissingCoverageError,
    NoValidPairsError,
    StreetKitError,
)
from .raster import RasterPatch, EnhanceConfig, binarize, dilate, skeletonize, enhance
from .graph import (
    ExtractConfig,
    PixelClassification,
    StreetGraph,
    build_graph,
    classify_pixels,
    extract,
    remove_right_triangles,
    simplify,
)
from .graph_io import graph_from_geojson, graph_to_geojson, load_geojson, save_geojson
from .metrics import (
    GUIDELINE_MIN_CONNECTIVITY,
    MetricsConfig,
    MetricsReport,
    SamplePair,
    compare,
    connectivity_index,
    intersection_density,
    ks_statistic,
    metric_reach,
    network_distances,
    reach_from_vertex,
    report,
    total_street_length,
    transportation_convenience,
)
from .geodata import (
    ConditionSet,
    PatchSpec,
    Polyline,
    RasterSource,
    VectorStreetSet,
    align_condition_layers,
    crop_patches,
    filter_highways,
    project_web_mercator,
    rasterize,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "EmptyCorpusError",
    "EmptyGraphError",
    "LatitudeOutOfRangeError",
    "MissingCoverageError",
    "NoValidPairsError",
    "StreetKitError",
    "RasterPatch",
    "EnhanceConfig",
    "binarize",
    "dilate",
    "skeletonize",
    "enhance",
    "ExtractConfig",
    "PixelClassification",
    "StreetGraph",
    "build_graph",
    "classify_pixels",
    "extract",
    "remove_right_triangles",
    "simplify",
    "graph_from_geojson",
    "graph_to_geojson",
    "load_geojson",
    "save_geojson",
    "GUIDELINE_MIN_CONNECTIVITY",
    "MetricsConfig",
    "MetricsReport",
    "SamplePair",
    "compare",
    "connectivity_index",
    "intersection_density",
    "ks_statistic",
    "metric_reach",
    "network_distances",
    "reach_from_vertex",
    "report",
    "total_street_length",
    "transportation_convenience",
    "ConditionSet",
    "PatchSpec",
    "Polyline",
    "RasterSource",
    "VectorStreetSet",
    "align_condition_layers",
    "crop_patches",
    "filter_highways",
    "project_web_mercator",
    "rasterize",
]
