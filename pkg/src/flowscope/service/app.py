"""FastAPI application exposing the analysis engine.

JSON is the control plane; rasters travel as binary PGM/PPM bodies with
their metadata (normalization constant, resolved viewport, pyramid level)
in X- response headers so the console's draw path never parses JSON.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .. import __version__
from ..aggregate import resolution_for
from ..correlate import brush_rows, correlation_matrix
from ..flowio import parse_flows
from ..model import KeySchema
from ..ops import dataset_pyramid, matrix_ppm, raster_pgm, resolve_viewport
from ..query import (
    KeyPattern,
    combine_selections,
    pick,
    select_by_pattern,
    select_by_threshold,
    select_by_zoom,
)
from ..raster import Viewport, overlay
from ..scenario import generate_scenario, preset
from .schemas import (
    AnnotationCreate,
    AnnotationModel,
    BrushRequest,
    CorrelationCreate,
    CorrelationInfo,
    DatasetCreate,
    DatasetInfo,
    OverlayResponse,
    OverlayStreamModel,
    PickHitModel,
    PickRequest,
    PickResponse,
    SelectionCreate,
    SelectionResponse,
    ViewportEcho,
    ViewportModel,
)
from .state import DatasetState, Registry

PGM_MEDIA = "image/x-portable-graymap"
PPM_MEDIA = "image/x-portable-pixmap"


def _dataset_info(ds: DatasetState) -> DatasetInfo:
    base = ds.base
    return DatasetInfo(
        id=ds.id,
        key_schema=ds.schema.value,
        bucket_width_s=ds.bucket_width_s,
        stream_count=len(base.streams),
        t0=base.t0,
        t1=base.t1,
        n_buckets=base.n_buckets,
        pyramid_depth=ds.pyramid.depth,
        source=ds.source,
    )


def _viewport(ds: DatasetState, vm: ViewportModel) -> Viewport:
    return resolve_viewport(
        ds.pyramid, vm.width, vm.height, vm.t0, vm.t1, vm.v_lo, vm.v_hi, vm.norm
    )


def _viewport_echo(vp: Viewport) -> ViewportEcho:
    return ViewportEcho(
        width=vp.width_px, height=vp.height_px, t0=vp.t0, t1=vp.t1,
        v_lo=vp.v_lo, v_hi=vp.v_hi, norm=vp.norm,
    )


def _selection_response(
    ds: DatasetState, selection, child: Viewport | None = None
) -> SelectionResponse:
    return SelectionResponse(
        id=selection.id,
        origin=selection.origin,
        stream_ids=list(selection.stream_ids),
        keys=[str(ds.base.stream(i).key) for i in selection.stream_ids],
        child_viewport=_viewport_echo(child) if child is not None else None,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="flowscope", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["*"],
    )
    registry = Registry()
    app.state.registry = registry

    @app.exception_handler(ValueError)
    async def _bad_request(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(LookupError)
    async def _not_found(request: Request, exc: LookupError) -> JSONResponse:
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/datasets", response_model=DatasetInfo)
    def create_dataset(body: DatasetCreate) -> DatasetInfo:
        if body.csv_text is not None:
            records = parse_flows(body.csv_text)
            source = "csv"
        elif body.path is not None:
            try:
                text = Path(body.path).read_text(encoding="utf-8")
            except OSError as exc:
                raise ValueError(f"cannot read {body.path}: {exc}") from None
            records = parse_flows(text)
            source = f"path:{body.path}"
        else:
            spec = preset(body.scenario, body.seed)
            records, _ = generate_scenario(spec)
            source = f"scenario:{body.scenario}:{spec.seed}"
        schema = KeySchema.parse(body.key_schema)
        pyramid = dataset_pyramid(records, schema, body.bucket_width_s)
        ds = registry.add_dataset(source, schema, body.bucket_width_s, pyramid)
        return _dataset_info(ds)

    @app.get("/datasets", response_model=list[DatasetInfo])
    def list_datasets() -> list[DatasetInfo]:
        return [_dataset_info(ds) for ds in registry.datasets.values()]

    @app.get("/datasets/{dataset_id}", response_model=DatasetInfo)
    def get_dataset(dataset_id: str) -> DatasetInfo:
        return _dataset_info(registry.dataset(dataset_id))

    @app.get("/datasets/{dataset_id}/raster")
    def get_raster(
        dataset_id: str,
        width: int = Query(default=1024, ge=1, le=8192),
        height: int = Query(default=512, ge=1, le=8192),
        t0: float | None = None,
        t1: float | None = None,
        v_lo: float | None = None,
        v_hi: float | None = None,
        mode: str = "linear",
        norm: float | None = Query(default=None, gt=0),
        level: int | None = None,
    ) -> Response:
        ds = registry.dataset(dataset_id)
        vp = resolve_viewport(ds.pyramid, width, height, t0, t1, v_lo, v_hi, norm)
        rr = raster_pgm(ds.pyramid, vp, mode, level)
        return Response(
            content=rr.data,
            media_type=PGM_MEDIA,
            headers={
                "X-Norm-Used": repr(rr.norm_used),
                "X-Level": str(rr.level),
                "X-T0": repr(vp.t0),
                "X-T1": repr(vp.t1),
                "X-V-Lo": repr(vp.v_lo),
                "X-V-Hi": repr(vp.v_hi),
                "X-Mode": mode,
            },
        )

    @app.post("/datasets/{dataset_id}/pick", response_model=PickResponse)
    def post_pick(dataset_id: str, body: PickRequest) -> PickResponse:
        ds = registry.dataset(dataset_id)
        vp = _viewport(ds, body.viewport)
        lvl = resolution_for(vp.width_px, vp.t1 - vp.t0, ds.pyramid)
        stream_set = ds.pyramid.levels[lvl]
        hits = pick(stream_set, vp, body.x, body.y, body.tolerance)
        return PickResponse(hits=[
            PickHitModel(
                stream_id=h.stream_id,
                key=str(h.key),
                field_a=str(h.key.field_a),
                field_b=h.key.field_b,
                bucket_index=h.bucket_index,
                t=stream_set.bucket_time(h.bucket_index),
                value=h.value,
            )
            for h in hits
        ])

    @app.post("/datasets/{dataset_id}/selections", response_model=SelectionResponse)
    def post_selection(dataset_id: str, body: SelectionCreate) -> SelectionResponse:
        ds = registry.dataset(dataset_id)
        child = None
        if body.kind == "pattern":
            pattern = KeyPattern(
                sip=body.pattern.sip, dip=body.pattern.dip, dport=body.pattern.dport
            )
            selection = select_by_pattern(ds.base, pattern)
        elif body.kind == "threshold":
            selection = select_by_threshold(ds.base, body.threshold)
        elif body.kind == "zoom":
            parent = _viewport(ds, body.zoom.viewport)
            selection, child = select_by_zoom(
                ds.base, parent,
                body.zoom.t_lo, body.zoom.t_hi,
                body.zoom.v_lo, body.zoom.v_hi,
                body.zoom.norm_used,
            )
        else:
            base_sel = registry.selection(ds, body.combine.base_id)
            incoming = registry.selection(ds, body.combine.incoming_id)
            selection = combine_selections(base_sel, incoming, body.combine.mode)
        registered = registry.add_selection(ds, selection)
        return _selection_response(ds, registered, child)

    @app.get(
        "/datasets/{dataset_id}/selections/{selection_id}",
        response_model=SelectionResponse,
    )
    def get_selection(dataset_id: str, selection_id: str) -> SelectionResponse:
        ds = registry.dataset(dataset_id)
        return _selection_response(ds, registry.selection(ds, selection_id))

    @app.get(
        "/datasets/{dataset_id}/selections/{selection_id}/overlay",
        response_model=OverlayResponse,
    )
    def get_overlay(
        dataset_id: str,
        selection_id: str,
        width: int = Query(default=1024, ge=1, le=8192),
        height: int = Query(default=512, ge=1, le=8192),
        t0: float | None = None,
        t1: float | None = None,
        v_lo: float | None = None,
        v_hi: float | None = None,
        level: int | None = None,
    ) -> OverlayResponse:
        ds = registry.dataset(dataset_id)
        selection = registry.selection(ds, selection_id)
        vp = resolve_viewport(ds.pyramid, width, height, t0, t1, v_lo, v_hi)
        if level is None:
            level = resolution_for(vp.width_px, vp.t1 - vp.t0, ds.pyramid)
        elif not 0 <= level < ds.pyramid.depth:
            raise ValueError(f"pyramid level {level} outside 0..{ds.pyramid.depth - 1}")
        geometry = overlay(ds.pyramid.levels[level], vp, selection.stream_ids)
        return OverlayResponse(items=[
            OverlayStreamModel(
                stream_id=item.stream_id,
                key=item.key,
                color=item.color,
                polylines=[list(line) for line in item.polylines],
                circles=list(item.circles),
            )
            for item in geometry.items
        ])

    @app.post("/datasets/{dataset_id}/correlation", response_model=CorrelationInfo)
    def post_correlation(dataset_id: str, body: CorrelationCreate) -> CorrelationInfo:
        ds = registry.dataset(dataset_id)
        base = ds.base
        t_lo = base.t0 if body.t0 is None else body.t0
        t_hi = base.t1 if body.t1 is None else body.t1
        ids = None
        if body.selection_id is not None:
            ids = registry.selection(ds, body.selection_id).stream_ids
        matrix = correlation_matrix(base, t_lo, t_hi, ids)
        ms = registry.add_matrix(ds, matrix, body.order)
        ordering = ms.ordering()
        return CorrelationInfo(
            id=ms.id,
            n=matrix.n,
            stream_ids=list(matrix.stream_ids),
            window_t0=matrix.window[0],
            window_t1=matrix.window[1],
            order=ordering.mode,
            perm=list(ordering.perm),
            angles=list(ordering.angles),
            degenerate=ordering.degenerate,
        )

    @app.get("/correlation/{matrix_id}/raster")
    def get_matrix_raster(
        matrix_id: str,
        size: int = Query(default=256, ge=1, le=4096),
        order: str | None = None,
    ) -> Response:
        ms = registry.matrix(matrix_id)
        ordering = ms.ordering(order)
        data = matrix_ppm(ms.matrix, ordering, size)
        return Response(
            content=data,
            media_type=PPM_MEDIA,
            headers={"X-N": str(ms.matrix.n), "X-Order": ordering.mode},
        )

    @app.post("/correlation/{matrix_id}/brush", response_model=SelectionResponse)
    def post_brush(matrix_id: str, body: BrushRequest) -> SelectionResponse:
        ms = registry.matrix(matrix_id)
        ds = registry.dataset(ms.dataset_id)
        selection = brush_rows(ms.matrix, ms.ordering(), body.row_lo, body.row_hi)
        registered = registry.add_selection(ds, selection)
        return _selection_response(ds, registered)

    @app.post("/datasets/{dataset_id}/annotations", response_model=AnnotationModel)
    def post_annotation(dataset_id: str, body: AnnotationCreate) -> AnnotationModel:
        ds = registry.dataset(dataset_id)
        item = ds.annotations.annotate(body.t, body.v, body.text)
        return AnnotationModel(id=item.id, t=item.t, v=item.v, text=item.text)

    @app.get("/datasets/{dataset_id}/annotations", response_model=list[AnnotationModel])
    def list_annotations(dataset_id: str) -> list[AnnotationModel]:
        ds = registry.dataset(dataset_id)
        return [
            AnnotationModel(id=a.id, t=a.t, v=a.v, text=a.text)
            for a in ds.annotations.list()
        ]

    return app
