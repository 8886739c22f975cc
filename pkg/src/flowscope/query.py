"""Interactive selection primitives over a built StreamSet.

All operations are read-only on the stream data and return immutable
SelectionSets; the annotation store is the one mutable structure and
serializes its writes.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable

from .aggregate import StreamSet, plot_value
from .model import KeySchema, StreamKey, ip_octets
from .raster import Viewport, project_point

WILDCARD = "*"

ORIGIN_PICK = "pick"
ORIGIN_KEY_PATTERN = "key-pattern"
ORIGIN_THRESHOLD = "threshold"
ORIGIN_BRUSH = "brush"
ORIGIN_ZOOM = "zoom"

COMBINE_ADD = "add"
COMBINE_EXCLUSIVE = "exclusive"
COMBINE_FLIP = "flip"
COMBINE_MODES = (COMBINE_ADD, COMBINE_EXCLUSIVE, COMBINE_FLIP)


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionSet:
    """An ordered, de-duplicated set of stream ids with a provenance tag."""

    id: str
    stream_ids: tuple[int, ...]
    origin: str

    def __post_init__(self) -> None:
        if len(set(self.stream_ids)) != len(self.stream_ids):
            raise QueryError("selection contains duplicate stream ids")


def _dedup(ids: Iterable[int]) -> tuple[int, ...]:
    seen = set()
    out = []
    for i in ids:
        if i not in seen:
            seen.add(i)
            out.append(i)
    return tuple(out)


def _validate_ip_pattern(pattern: str) -> None:
    if pattern == WILDCARD:
        return
    if pattern.endswith(".*"):
        parts = pattern[:-2].split(".")
        if not 1 <= len(parts) <= 3 or any(
            not p.isdigit() or int(p) > 255 for p in parts
        ):
            raise QueryError(f"bad address prefix pattern {pattern!r}")
        return
    try:
        ip_octets(pattern)
    except ValueError:
        raise QueryError(f"bad address pattern {pattern!r}") from None


def _match_ip(pattern: str, ip: str) -> bool:
    if pattern == WILDCARD:
        return True
    if pattern.endswith(".*"):
        return ip.startswith(pattern[:-1])
    return ip == pattern


@dataclass(frozen=True)
class KeyPattern:
    """Wildcardable constraints on key fields.

    Addresses accept an exact dotted quad, a dotted prefix like "20.167.*",
    or "*". The port accepts an exact number or "*". At least one field
    must constrain something, and constrained fields must belong to the
    key schema being queried.
    """

    sip: str = WILDCARD
    dip: str = WILDCARD
    dport: str = WILDCARD

    def __post_init__(self) -> None:
        if self.sip == self.dip == self.dport == WILDCARD:
            raise QueryError("pattern must constrain at least one field")
        _validate_ip_pattern(self.sip)
        _validate_ip_pattern(self.dip)
        if self.dport != WILDCARD and (
            not self.dport.isdigit() or not 0 <= int(self.dport) <= 65535
        ):
            raise QueryError(f"bad port pattern {self.dport!r}")

    def check_schema(self, schema: KeySchema) -> None:
        absent = {
            KeySchema.SIP_DPORT: ("dip", self.dip),
            KeySchema.DIP_DPORT: ("sip", self.sip),
            KeySchema.SIP_DIP: ("dport", self.dport),
        }[schema]
        name, value = absent
        if value != WILDCARD:
            raise QueryError(
                f"pattern constrains {name}, which is not part of the {schema.value} key"
            )

    def matches(self, key: StreamKey) -> bool:
        if key.schema is KeySchema.SIP_DPORT:
            return _match_ip(self.sip, key.field_a) and self._match_port(key.field_b)
        if key.schema is KeySchema.DIP_DPORT:
            return _match_ip(self.dip, key.field_a) and self._match_port(key.field_b)
        return _match_ip(self.sip, key.field_a) and _match_ip(self.dip, key.field_b)

    def _match_port(self, port: object) -> bool:
        return self.dport == WILDCARD or int(self.dport) == port


@dataclass(frozen=True)
class PickHit:
    stream_id: int
    key: StreamKey
    bucket_index: int
    value: int


def pick(
    stream_set: StreamSet,
    vp: Viewport,
    px: int,
    py: int,
    tolerance: int = 1,
) -> list[PickHit]:
    """All stream points within Chebyshev distance tolerance of a pixel.

    The raw bucket failure value rides along with each hit so the caller
    can show counts without another round trip.
    """
    if not (0 <= px < vp.width_px and 0 <= py < vp.height_px):
        raise QueryError("pick pixel outside viewport")
    if tolerance < 0:
        raise QueryError("tolerance must be >= 0")
    hits = []
    for stream in stream_set.streams:
        for idx in sorted(stream.buckets):
            value = stream.buckets[idx]
            point = project_point(
                vp, float(stream_set.bucket_time(idx)), plot_value(value)
            )
            if point is None:
                continue
            x, y = point
            if abs(x - px) <= tolerance and abs(y - py) <= tolerance:
                hits.append(PickHit(stream_id=stream.id, key=stream.key,
                                    bucket_index=idx, value=value))
    return hits


def select_by_pattern(
    stream_set: StreamSet, pattern: KeyPattern, selection_id: str = ""
) -> SelectionSet:
    pattern.check_schema(stream_set.schema)
    ids = tuple(s.id for s in stream_set.streams if pattern.matches(s.key))
    return SelectionSet(id=selection_id, stream_ids=ids, origin=ORIGIN_KEY_PATTERN)


def select_by_threshold(
    stream_set: StreamSet, threshold: float, selection_id: str = ""
) -> SelectionSet:
    """Streams whose largest single-bucket failure value strictly exceeds
    the threshold."""
    if threshold < 0:
        raise QueryError("threshold must be >= 0")
    ids = tuple(
        s.id for s in stream_set.streams if s.max_failure() > threshold
    )
    return SelectionSet(id=selection_id, stream_ids=ids, origin=ORIGIN_THRESHOLD)


@dataclass(frozen=True)
class ThresholdRow:
    stream_id: int
    key: StreamKey
    max_failure: int
    t_of_max: int


def threshold_report(stream_set: StreamSet, threshold: float) -> list[ThresholdRow]:
    """Supra-threshold streams sorted by peak failures, largest first."""
    rows = []
    for sid in select_by_threshold(stream_set, threshold).stream_ids:
        stream = stream_set.stream(sid)
        peak = stream.max_failure()
        at = min(idx for idx, v in stream.buckets.items() if v == peak)
        rows.append(ThresholdRow(
            stream_id=sid,
            key=stream.key,
            max_failure=peak,
            t_of_max=stream_set.bucket_time(at),
        ))
    rows.sort(key=lambda r: (-r.max_failure, r.key.sort_key()))
    return rows


def select_by_zoom(
    stream_set: StreamSet,
    parent: Viewport,
    t_lo: float,
    t_hi: float,
    v_lo: float,
    v_hi: float,
    norm_used: float,
    selection_id: str = "",
) -> tuple[SelectionSet, Viewport]:
    """Streams intersecting a zoom rectangle, plus the child viewport.

    The child inherits the parent's pixel dimensions and the norm the
    parent was rendered with, so unchanged regions keep their brightness.
    """
    if not (t_lo < t_hi and v_lo < v_hi):
        raise QueryError("zoom ranges are empty")
    if t_lo < parent.t0 or t_hi > parent.t1 or v_lo < parent.v_lo or v_hi > parent.v_hi:
        raise QueryError("zoom ranges extend outside the parent viewport")
    ids = []
    for stream in stream_set.streams:
        for idx, value in stream.buckets.items():
            t = float(stream_set.bucket_time(idx))
            v = plot_value(value)
            if t_lo <= t <= t_hi and v_lo <= v <= v_hi:
                ids.append(stream.id)
                break
    child = Viewport(
        width_px=parent.width_px,
        height_px=parent.height_px,
        t0=t_lo,
        t1=t_hi,
        v_lo=v_lo,
        v_hi=v_hi,
        norm=norm_used,
    )
    return SelectionSet(id=selection_id, stream_ids=tuple(ids), origin=ORIGIN_ZOOM), child


def combine_selections(
    base: SelectionSet,
    incoming: SelectionSet,
    mode: str,
    selection_id: str = "",
) -> SelectionSet:
    """Set algebra over selections: add (union), exclusive (replace),
    flip (symmetric difference). Order is stable: surviving base ids first."""
    if mode not in COMBINE_MODES:
        raise QueryError(f"unknown combine mode {mode!r}")
    if mode == COMBINE_ADD:
        ids = _dedup(list(base.stream_ids) + list(incoming.stream_ids))
    elif mode == COMBINE_EXCLUSIVE:
        ids = incoming.stream_ids
    else:
        inc = set(incoming.stream_ids)
        bas = set(base.stream_ids)
        ids = tuple(
            [i for i in base.stream_ids if i not in inc]
            + [i for i in incoming.stream_ids if i not in bas]
        )
    return SelectionSet(id=selection_id, stream_ids=ids, origin=incoming.origin)


@dataclass(frozen=True)
class Annotation:
    id: int
    t: float
    v: float
    text: str


class AnnotationStore:
    """Insertion-ordered annotations for one dataset, anchored in data
    space so they survive any viewport change."""

    def __init__(self, stream_set: StreamSet) -> None:
        self._set = stream_set
        self._lock = threading.Lock()
        self._items: list[Annotation] = []

    def annotate(self, t: float, v: float, text: str) -> Annotation:
        if not self._set.t0 <= t <= self._set.t1:
            raise QueryError("annotation time outside dataset range")
        top = max(self._set.max_plot_value(), -1.0)
        if not -1.0 <= v <= max(top, 0.0):
            raise QueryError("annotation value outside plotted range")
        with self._lock:
            item = Annotation(id=len(self._items), t=t, v=v, text=text)
            self._items.append(item)
            return item

    def list(self) -> list[Annotation]:
        with self._lock:
            return list(self._items)
