"""Bucketing flow records into per-key failure time series.

Records are grouped by stream key and summed into fixed-width time buckets.
Streams whose positive failure total stays under the filter floor are
dropped before any plotting or correlation. A detail pyramid of pair-summed
levels supports zooming without re-reading raw records.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import FlowRecord, KeySchema, StreamKey, key_of

# Streams with fewer than this many failed connections over the whole time
# range are noise and never reach the display.
FILTER_MIN_FAILURES = 5

DEFAULT_BUCKET_WIDTH_S = 60


@dataclass(frozen=True)
class Stream:
    """One keyed failure-count time series.

    buckets maps bucket index to the summed failure delta for that bucket;
    indices with no records are absent. Bucket deltas may be negative when
    replies land in a later bucket than their requests; those buckets do not
    count toward total_failures.
    """

    id: int
    key: StreamKey
    buckets: dict[int, int]
    total_failures: int

    def max_failure(self) -> int:
        """Largest single-bucket failure value, 0 for an all-negative stream."""
        if not self.buckets:
            return 0
        return max(max(self.buckets.values()), 0)


@dataclass(frozen=True)
class StreamSet:
    schema: KeySchema
    bucket_width_s: int
    t0: int
    t1: int
    streams: tuple[Stream, ...]

    @property
    def n_buckets(self) -> int:
        return max(1, -(-(self.t1 - self.t0) // self.bucket_width_s))

    def bucket_time(self, index: int) -> int:
        """Start time of a bucket, the instant a bucket's point is plotted at."""
        return self.t0 + index * self.bucket_width_s

    def bucket_index(self, ts: int) -> int:
        return (ts - self.t0) // self.bucket_width_s

    def stream(self, stream_id: int) -> Stream:
        if not 0 <= stream_id < len(self.streams):
            raise KeyError(f"unknown stream id {stream_id}")
        return self.streams[stream_id]

    def max_plot_value(self) -> float:
        """Largest plot ordinate across all streams; -1.0 for an empty set."""
        top = -1.0
        for s in self.streams:
            for v in s.buckets.values():
                pv = plot_value(v)
                if pv > top:
                    top = pv
        return top


@dataclass(frozen=True)
class DetailPyramid:
    """Same streams at doubling bucket widths; levels[0] is the finest."""

    levels: tuple[StreamSet, ...]

    @property
    def depth(self) -> int:
        return len(self.levels)


def plot_value(delta: int | float) -> float:
    """Plot ordinate for a bucket value: ln(delta) above zero, else -1."""
    if delta >= 1:
        return math.log(delta)
    return -1.0


def build_streams(
    records: Iterable[FlowRecord],
    schema: KeySchema,
    bucket_width_s: int = DEFAULT_BUCKET_WIDTH_S,
) -> StreamSet:
    """Group records by key, bucket failure deltas by time, apply the filter.

    Surviving streams are sorted by key, so ids are stable under any
    permutation of the input records.
    """
    if bucket_width_s <= 0:
        raise ValueError("bucket_width_s must be > 0")
    records = list(records)
    if not records:
        return StreamSet(schema=schema, bucket_width_s=bucket_width_s, t0=0,
                         t1=bucket_width_s, streams=())
    ts_min = min(r.ts for r in records)
    ts_max = max(r.ts for r in records)
    t0 = (ts_min // bucket_width_s) * bucket_width_s
    t1 = ts_max + 1

    grouped: dict[StreamKey, dict[int, int]] = defaultdict(lambda: defaultdict(int))
    for r in records:
        grouped[key_of(r, schema)][(r.ts - t0) // bucket_width_s] += r.syn - r.synack

    streams: list[Stream] = []
    for key in sorted(grouped, key=StreamKey.sort_key):
        buckets = dict(grouped[key])
        total = sum(v for v in buckets.values() if v > 0)
        if total < FILTER_MIN_FAILURES:
            continue
        streams.append(Stream(id=len(streams), key=key, buckets=buckets, total_failures=total))
    return StreamSet(schema=schema, bucket_width_s=bucket_width_s, t0=t0, t1=t1,
                     streams=tuple(streams))


def build_pyramid(base: StreamSet, levels: int) -> DetailPyramid:
    """Pair-sum buckets into coarser levels; the filter is not re-applied.

    total_failures is carried from the base level unchanged, because pair
    sums can cancel mixed-sign buckets while the underlying failures remain.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    sets = [base]
    for _ in range(1, levels):
        prev = sets[-1]
        coarser = []
        for s in prev.streams:
            buckets: dict[int, int] = defaultdict(int)
            for idx, v in s.buckets.items():
                buckets[idx // 2] += v
            coarser.append(Stream(id=s.id, key=s.key, buckets=dict(buckets),
                                  total_failures=s.total_failures))
        sets.append(StreamSet(schema=prev.schema, bucket_width_s=prev.bucket_width_s * 2,
                              t0=prev.t0, t1=prev.t1, streams=tuple(coarser)))
    return DetailPyramid(levels=tuple(sets))


def resolution_for(viewport_width_px: int, time_range_s: int, pyramid: DetailPyramid) -> int:
    """Finest level whose bucket count across time_range_s fits the viewport.

    Falls back to the coarsest level when nothing fits.
    """
    if viewport_width_px < 1:
        raise ValueError("viewport_width_px must be >= 1")
    for level, stream_set in enumerate(pyramid.levels):
        buckets = -(-time_range_s // stream_set.bucket_width_s)
        if buckets <= viewport_width_px:
            return level
    return len(pyramid.levels) - 1


def dense_values(stream: Stream, bucket_lo: int, bucket_hi: int) -> np.ndarray:
    """Raw bucket deltas as a dense float vector; absent buckets are 0."""
    if bucket_hi <= bucket_lo:
        raise ValueError("bucket window is empty")
    out = np.zeros(bucket_hi - bucket_lo, dtype=np.float64)
    for idx, v in stream.buckets.items():
        if bucket_lo <= idx < bucket_hi:
            out[idx - bucket_lo] = v
    return out


def dense_matrix(streams: Sequence[Stream], bucket_lo: int, bucket_hi: int) -> np.ndarray:
    """Stacked dense_values rows for a batch of streams."""
    out = np.zeros((len(streams), bucket_hi - bucket_lo), dtype=np.float64)
    for row, s in enumerate(streams):
        for idx, v in s.buckets.items():
            if bucket_lo <= idx < bucket_hi:
                out[row, idx - bucket_lo] = v
    return out
