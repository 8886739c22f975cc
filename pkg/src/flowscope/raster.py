"""Density compositing of many failure streams into one image.

Every bucket of every stream becomes a point in (time, plot ordinate)
space. Points are binned into a pixel grid, isolated points are splatted
with a small tent kernel so lone outliers stay visible, and the resulting
frequency grid maps to luminance either linearly or with logarithmic
contrast compression. Zoomed child views reuse the parent's normalization
constant so shared pixels keep identical brightness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .aggregate import Stream, StreamSet, plot_value

LINEAR = "linear"
CONTRAST = "contrast"
MODES = (LINEAR, CONTRAST)

# Tent kernel added around an isolated point; the center weight stacks on
# top of the point's own mass.
SPLAT_KERNEL = np.array([
    [0.25, 0.5, 0.25],
    [0.5, 1.0, 0.5],
    [0.25, 0.5, 0.25],
])

# Selection highlight colors, assigned round-robin by position.
OVERLAY_PALETTE = (
    (230, 25, 75),
    (60, 180, 75),
    (255, 225, 25),
    (0, 130, 200),
    (245, 130, 48),
    (145, 30, 180),
    (70, 240, 240),
    (240, 50, 230),
)


@dataclass(frozen=True)
class Viewport:
    """Pixel dimensions plus the data-space window they display.

    norm carries a parent view's normalization constant into a zoomed
    child; None means normalize to this view's own maximum.
    """

    width_px: int
    height_px: int
    t0: float
    t1: float
    v_lo: float
    v_hi: float
    norm: float | None = None

    def __post_init__(self) -> None:
        if self.width_px < 1 or self.height_px < 1:
            raise ValueError("viewport must be at least 1x1 pixels")
        if not self.t0 < self.t1:
            raise ValueError("viewport time range is empty")
        if not self.v_lo < self.v_hi:
            raise ValueError("viewport value range is empty")
        if self.norm is not None and self.norm <= 0:
            raise ValueError("inherited norm must be > 0")


def default_viewport(stream_set: StreamSet, width_px: int, height_px: int) -> Viewport:
    """Full-dataset viewport: whole time range, ordinates from -1 up."""
    top = stream_set.max_plot_value()
    return Viewport(
        width_px=width_px,
        height_px=height_px,
        t0=float(stream_set.t0),
        t1=float(stream_set.t1),
        v_lo=-1.0,
        v_hi=top if top > -1.0 else 0.0,
    )


def project_point(vp: Viewport, t: float, v: float) -> tuple[int, int] | None:
    """Pixel for a data point, or None when it falls outside the viewport.

    Points exactly on the far edges land in the last row/column.
    """
    if not (vp.t0 <= t <= vp.t1 and vp.v_lo <= v <= vp.v_hi):
        return None
    x = int((t - vp.t0) / (vp.t1 - vp.t0) * vp.width_px)
    y = int((vp.v_hi - v) / (vp.v_hi - vp.v_lo) * vp.height_px)
    return min(x, vp.width_px - 1), min(y, vp.height_px - 1)


def stream_points(stream_set: StreamSet, stream: Stream) -> Iterable[tuple[float, float]]:
    """(time, plot ordinate) pairs for every bucket of a stream."""
    for idx in sorted(stream.buckets):
        yield float(stream_set.bucket_time(idx)), plot_value(stream.buckets[idx])


def count_frequencies(stream_set: StreamSet, vp: Viewport) -> np.ndarray:
    """Per-pixel counts of plotted points, shape (height, width)."""
    grid = np.zeros((vp.height_px, vp.width_px), dtype=np.float64)
    for stream in stream_set.streams:
        for t, v in stream_points(stream_set, stream):
            hit = project_point(vp, t, v)
            if hit is not None:
                x, y = hit
                grid[y, x] += 1.0
    return grid


def _shift_add(dst: np.ndarray, src: np.ndarray, dy: int, dx: int, weight: float) -> None:
    h, w = src.shape
    dst[max(dy, 0):h + min(dy, 0), max(dx, 0):w + min(dx, 0)] += (
        weight * src[max(-dy, 0):h + min(-dy, 0), max(-dx, 0):w + min(-dx, 0)]
    )


def splat(freq: np.ndarray) -> np.ndarray:
    """Spread isolated cells with the tent kernel; everything else unchanged.

    Isolation is judged on the input grid (all 8 neighbors zero), so the
    result does not depend on any cell visiting order.
    """
    occupied = (freq > 0).astype(np.float64)
    neighbors = np.zeros_like(freq)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            _shift_add(neighbors, occupied, dy, dx, 1.0)
    isolated_mass = np.where((freq > 0) & (neighbors == 0), freq, 0.0)
    out = freq.copy()
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            _shift_add(out, isolated_mass, dy, dx, float(SPLAT_KERNEL[dy + 1, dx + 1]))
    return out


def to_luminance(
    freq: np.ndarray,
    mode: str = LINEAR,
    norm: float | None = None,
) -> tuple[np.ndarray, float]:
    """Map frequencies to [0,1] luminance; returns (luminance, norm used).

    linear divides by the norm; contrast applies ln(1+f)/ln(1+norm), which
    lifts sparse regions. Without an explicit norm the grid's own maximum
    is used (1.0 for an empty grid).
    """
    if mode not in MODES:
        raise ValueError(f"unknown luminance mode {mode!r}")
    if norm is None:
        peak = float(freq.max()) if freq.size else 0.0
        norm_used = peak if peak > 0 else 1.0
    else:
        if norm <= 0:
            raise ValueError("norm must be > 0")
        norm_used = float(norm)
    if mode == LINEAR:
        lum = freq / norm_used
    else:
        lum = np.log1p(freq) / np.log1p(norm_used)
    return np.clip(lum, 0.0, 1.0), norm_used


@dataclass(frozen=True)
class DensityRaster:
    freq: np.ndarray
    lum: np.ndarray
    norm_used: float
    mode: str


def render(stream_set: StreamSet, vp: Viewport, mode: str = LINEAR) -> DensityRaster:
    """Full compositing pipeline: count, splat, then luminance-map."""
    freq = splat(count_frequencies(stream_set, vp))
    lum, norm_used = to_luminance(freq, mode, vp.norm)
    return DensityRaster(freq=freq, lum=lum, norm_used=norm_used, mode=mode)


@dataclass(frozen=True)
class OverlayStream:
    stream_id: int
    key: str
    color: tuple[int, int, int]
    polylines: tuple[tuple[tuple[int, int], ...], ...]
    circles: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class OverlayGeometry:
    items: tuple[OverlayStream, ...]


def _clamped_pixel(vp: Viewport, t: float, v: float) -> tuple[int, int]:
    v = min(max(v, vp.v_lo), vp.v_hi)
    hit = project_point(vp, t, v)
    assert hit is not None
    return hit


def overlay(
    stream_set: StreamSet,
    vp: Viewport,
    stream_ids: Sequence[int],
) -> OverlayGeometry:
    """Highlight geometry for the given streams over a rendered viewport.

    Buckets inside the time window are linked into polylines; a jump of two
    or more bucket widths starts a new polyline. Each polyline gets a start
    and an end circle. Values outside the value range clamp to the edge
    rather than dropping, so a trace never silently loses its middle.
    """
    items = []
    for pos, sid in enumerate(stream_ids):
        stream = stream_set.stream(sid)
        indices = [
            idx for idx in sorted(stream.buckets)
            if vp.t0 <= stream_set.bucket_time(idx) <= vp.t1
        ]
        runs: list[list[int]] = []
        for idx in indices:
            if runs and idx - runs[-1][-1] == 1:
                runs[-1].append(idx)
            else:
                runs.append([idx])
        polylines = []
        circles = []
        for run in runs:
            points = tuple(
                _clamped_pixel(vp, float(stream_set.bucket_time(i)),
                               plot_value(stream.buckets[i]))
                for i in run
            )
            polylines.append(points)
            circles.append(points[0])
            circles.append(points[-1])
        items.append(OverlayStream(
            stream_id=sid,
            key=str(stream.key),
            color=OVERLAY_PALETTE[pos % len(OVERLAY_PALETTE)],
            polylines=tuple(polylines),
            circles=tuple(circles),
        ))
    return OverlayGeometry(items=tuple(items))
