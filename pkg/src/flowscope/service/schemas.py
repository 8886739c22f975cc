"""Request and response bodies for the HTTP service.

Field names here are the wire contract the console and scripts depend on;
see the repository README for the endpoint-by-endpoint reference. The key
schema travels as ``key_schema`` in JSON.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator

SCHEMA_VALUES = ("sip-dport", "dip-dport", "sip-dip")


class ViewportModel(BaseModel):
    """Viewport parameters; omitted bounds fall back to the dataset extent."""

    width: int = Field(default=1024, ge=1, le=8192)
    height: int = Field(default=512, ge=1, le=8192)
    t0: float | None = None
    t1: float | None = None
    v_lo: float | None = None
    v_hi: float | None = None
    norm: float | None = Field(default=None, gt=0)


class ViewportEcho(BaseModel):
    width: int
    height: int
    t0: float
    t1: float
    v_lo: float
    v_hi: float
    norm: float | None = None


class DatasetCreate(BaseModel):
    """Exactly one of csv_text, path, or scenario supplies the records."""

    csv_text: str | None = None
    path: str | None = None
    scenario: str | None = None
    seed: int | None = None
    key_schema: str = "sip-dport"
    bucket_width_s: int = Field(default=60, ge=1)

    @model_validator(mode="after")
    def _one_source(self) -> "DatasetCreate":
        sources = [s for s in (self.csv_text, self.path, self.scenario) if s is not None]
        if len(sources) != 1:
            raise ValueError("provide exactly one of csv_text, path, scenario")
        if self.seed is not None and self.scenario is None:
            raise ValueError("seed only applies to scenario datasets")
        return self


class DatasetInfo(BaseModel):
    id: str
    key_schema: str
    bucket_width_s: int
    stream_count: int
    t0: int
    t1: int
    n_buckets: int
    pyramid_depth: int
    source: str


class PickRequest(BaseModel):
    x: int
    y: int
    tolerance: int = Field(default=1, ge=0)
    viewport: ViewportModel = Field(default_factory=ViewportModel)


class PickHitModel(BaseModel):
    stream_id: int
    key: str
    field_a: str
    field_b: str | int
    bucket_index: int
    t: int
    value: int


class PickResponse(BaseModel):
    hits: list[PickHitModel]


class PatternModel(BaseModel):
    sip: str = "*"
    dip: str = "*"
    dport: str = "*"


class ZoomModel(BaseModel):
    t_lo: float
    t_hi: float
    v_lo: float
    v_hi: float
    norm_used: float = Field(gt=0)
    viewport: ViewportModel = Field(default_factory=ViewportModel)


class CombineModel(BaseModel):
    base_id: str
    incoming_id: str
    mode: str


class SelectionCreate(BaseModel):
    """One of pattern, threshold, zoom, or combine, matching ``kind``."""

    kind: str
    pattern: PatternModel | None = None
    threshold: float | None = None
    zoom: ZoomModel | None = None
    combine: CombineModel | None = None

    @model_validator(mode="after")
    def _kind_payload(self) -> "SelectionCreate":
        payloads = {
            "pattern": self.pattern,
            "threshold": self.threshold,
            "zoom": self.zoom,
            "combine": self.combine,
        }
        if self.kind not in payloads:
            raise ValueError(
                "kind must be one of pattern, threshold, zoom, combine"
            )
        if payloads[self.kind] is None:
            raise ValueError(f"selection kind {self.kind!r} needs a {self.kind} body")
        return self


class SelectionResponse(BaseModel):
    id: str
    origin: str
    stream_ids: list[int]
    keys: list[str]
    child_viewport: ViewportEcho | None = None


class OverlayStreamModel(BaseModel):
    stream_id: int
    key: str
    color: tuple[int, int, int]
    polylines: list[list[tuple[int, int]]]
    circles: list[tuple[int, int]]


class OverlayResponse(BaseModel):
    items: list[OverlayStreamModel]


class CorrelationCreate(BaseModel):
    t0: float | None = None
    t1: float | None = None
    selection_id: str | None = None
    order: str = "weighted"


class CorrelationInfo(BaseModel):
    id: str
    n: int
    stream_ids: list[int]
    window_t0: float
    window_t1: float
    order: str
    perm: list[int]
    angles: list[float]
    degenerate: bool


class BrushRequest(BaseModel):
    row_lo: int = Field(ge=0)
    row_hi: int = Field(ge=0)


class AnnotationCreate(BaseModel):
    t: float
    v: float
    text: str


class AnnotationModel(BaseModel):
    id: int
    t: float
    v: float
    text: str
