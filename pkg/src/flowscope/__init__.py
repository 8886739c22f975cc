"""flowscope: an intrusion-analysis workbench for NetFlow failure counts.

Keyed flow records become bucketed failure-count streams, composited into
density rasters with interactive pick/pattern/threshold/zoom queries, plus
a reordered correlation-matrix view for spotting coordinated attacks. A
deterministic scenario generator supplies labeled traffic for tests and
demos.
"""

__version__ = "0.1.0"

from .aggregate import (
    DEFAULT_BUCKET_WIDTH_S,
    FILTER_MIN_FAILURES,
    DetailPyramid,
    Stream,
    StreamSet,
    build_pyramid,
    build_streams,
    plot_value,
    resolution_for,
)
from .correlate import (
    CorrelationMatrix,
    MatrixOrdering,
    brush_rows,
    correlation_matrix,
    order_by_correlation,
    pearson,
    render_matrix,
)
from .flowio import FlowParseError, parse_flows, parse_labeled_flows, serialize_flows
from .model import (
    AttackClass,
    FlowRecord,
    KeySchema,
    StreamKey,
    failure_delta,
    key_of,
    selectivity,
)
from .query import (
    Annotation,
    AnnotationStore,
    KeyPattern,
    PickHit,
    SelectionSet,
    combine_selections,
    pick,
    select_by_pattern,
    select_by_threshold,
    select_by_zoom,
    threshold_report,
)
from .raster import (
    DensityRaster,
    OverlayGeometry,
    Viewport,
    count_frequencies,
    default_viewport,
    overlay,
    render,
    splat,
    to_luminance,
)
from .scenario import AttackSpec, ScenarioSpec, catalog, generate_scenario, preset

__all__ = [
    "AttackClass",
    "AttackSpec",
    "Annotation",
    "AnnotationStore",
    "CorrelationMatrix",
    "DEFAULT_BUCKET_WIDTH_S",
    "DensityRaster",
    "DetailPyramid",
    "FILTER_MIN_FAILURES",
    "FlowParseError",
    "FlowRecord",
    "KeyPattern",
    "KeySchema",
    "MatrixOrdering",
    "OverlayGeometry",
    "PickHit",
    "SelectionSet",
    "Stream",
    "StreamKey",
    "StreamSet",
    "Viewport",
    "brush_rows",
    "build_pyramid",
    "build_streams",
    "catalog",
    "combine_selections",
    "correlation_matrix",
    "count_frequencies",
    "default_viewport",
    "failure_delta",
    "generate_scenario",
    "key_of",
    "order_by_correlation",
    "overlay",
    "parse_flows",
    "parse_labeled_flows",
    "pearson",
    "pick",
    "plot_value",
    "preset",
    "render",
    "render_matrix",
    "resolution_for",
    "select_by_pattern",
    "select_by_threshold",
    "select_by_zoom",
    "selectivity",
    "serialize_flows",
    "splat",
    "threshold_report",
    "to_luminance",
]
