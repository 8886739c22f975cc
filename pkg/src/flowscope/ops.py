"""High-level operations shared by the HTTP service and the CLI.

Both front ends funnel through these helpers, which is what makes a CLI
render and the equivalent service response byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .aggregate import (
    DEFAULT_BUCKET_WIDTH_S,
    DetailPyramid,
    StreamSet,
    build_pyramid,
    build_streams,
    resolution_for,
)
from .correlate import CorrelationMatrix, MatrixOrdering, render_matrix
from .images import luminance_bytes, write_pgm, write_ppm
from .model import FlowRecord, KeySchema
from .raster import Viewport, default_viewport, render

# Coarsening stops once a level fits this many buckets, or at the depth
# cap; a 25-hour minute-bucketed run tops out well inside both.
PYRAMID_FLOOR_BUCKETS = 64
PYRAMID_MAX_DEPTH = 8


def pyramid_depth(n_buckets: int) -> int:
    depth = 1
    buckets = n_buckets
    while buckets > PYRAMID_FLOOR_BUCKETS and depth < PYRAMID_MAX_DEPTH:
        buckets = -(-buckets // 2)
        depth += 1
    return depth


def dataset_pyramid(
    records: Iterable[FlowRecord],
    schema: KeySchema,
    bucket_width_s: int = DEFAULT_BUCKET_WIDTH_S,
) -> DetailPyramid:
    base = build_streams(records, schema, bucket_width_s)
    return build_pyramid(base, pyramid_depth(base.n_buckets))


def resolve_viewport(
    pyramid: DetailPyramid,
    width_px: int,
    height_px: int,
    t0: float | None = None,
    t1: float | None = None,
    v_lo: float | None = None,
    v_hi: float | None = None,
    norm: float | None = None,
) -> Viewport:
    """Fill unspecified viewport fields from the dataset's full extent.

    The default value ceiling covers every pyramid level, not just the
    base, because coarse levels sum pairs of buckets and can peak higher;
    a defaulted overview must not clip those peaks.
    """
    dv = default_viewport(pyramid.levels[0], width_px, height_px)
    top = max(level.max_plot_value() for level in pyramid.levels)
    return Viewport(
        width_px=width_px,
        height_px=height_px,
        t0=dv.t0 if t0 is None else float(t0),
        t1=dv.t1 if t1 is None else float(t1),
        v_lo=dv.v_lo if v_lo is None else float(v_lo),
        v_hi=(top if top > -1.0 else 0.0) if v_hi is None else float(v_hi),
        norm=norm,
    )


@dataclass(frozen=True)
class RasterResult:
    data: bytes
    norm_used: float
    level: int
    viewport: Viewport


def raster_pgm(
    pyramid: DetailPyramid,
    vp: Viewport,
    mode: str = "linear",
    level: int | None = None,
) -> RasterResult:
    """Render one viewport to PGM bytes at an explicit or display-fitted
    pyramid level."""
    if level is None:
        level = resolution_for(vp.width_px, vp.t1 - vp.t0, pyramid)
    elif not 0 <= level < pyramid.depth:
        raise ValueError(f"pyramid level {level} outside 0..{pyramid.depth - 1}")
    result = render(pyramid.levels[level], vp, mode)
    return RasterResult(
        data=write_pgm(luminance_bytes(result.lum)),
        norm_used=result.norm_used,
        level=level,
        viewport=vp,
    )


def matrix_ppm(m: CorrelationMatrix, ordering: MatrixOrdering, size_px: int) -> bytes:
    return write_ppm(render_matrix(m, ordering, size_px))
