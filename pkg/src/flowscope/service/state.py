"""In-memory registry of datasets, selections, and correlation matrices.

Everything lives for the process lifetime under short token ids. Built
structures are immutable, so reads need no locking; the registry lock only
guards id allocation and map insertion, and each annotation store
serializes its own writes.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from ..aggregate import DetailPyramid, StreamSet
from ..correlate import CorrelationMatrix, MatrixOrdering, order_by_correlation
from ..model import KeySchema
from ..query import AnnotationStore, SelectionSet


@dataclass
class DatasetState:
    id: str
    source: str
    schema: KeySchema
    bucket_width_s: int
    pyramid: DetailPyramid
    annotations: AnnotationStore
    selections: dict[str, SelectionSet] = field(default_factory=dict)

    @property
    def base(self) -> StreamSet:
        return self.pyramid.levels[0]


@dataclass
class MatrixState:
    id: str
    dataset_id: str
    matrix: CorrelationMatrix
    default_order: str
    orderings: dict[str, MatrixOrdering] = field(default_factory=dict)

    def ordering(self, mode: str | None = None) -> MatrixOrdering:
        mode = mode or self.default_order
        if mode not in self.orderings:
            self.orderings[mode] = order_by_correlation(self.matrix, mode)
        return self.orderings[mode]


class Registry:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._next = 0
        self.datasets: dict[str, DatasetState] = {}
        self.matrices: dict[str, MatrixState] = {}

    def _token(self, prefix: str) -> str:
        with self._lock:
            self._next += 1
            return f"{prefix}-{self._next}"

    def add_dataset(
        self,
        source: str,
        schema: KeySchema,
        bucket_width_s: int,
        pyramid: DetailPyramid,
    ) -> DatasetState:
        ds = DatasetState(
            id=self._token("ds"),
            source=source,
            schema=schema,
            bucket_width_s=bucket_width_s,
            pyramid=pyramid,
            annotations=AnnotationStore(pyramid.levels[0]),
        )
        with self._lock:
            self.datasets[ds.id] = ds
        return ds

    def dataset(self, dataset_id: str) -> DatasetState:
        try:
            return self.datasets[dataset_id]
        except KeyError:
            raise LookupError(f"unknown dataset {dataset_id!r}") from None

    def add_selection(self, ds: DatasetState, selection: SelectionSet) -> SelectionSet:
        tagged = SelectionSet(
            id=self._token("sel"),
            stream_ids=selection.stream_ids,
            origin=selection.origin,
        )
        with self._lock:
            ds.selections[tagged.id] = tagged
        return tagged

    def selection(self, ds: DatasetState, selection_id: str) -> SelectionSet:
        try:
            return ds.selections[selection_id]
        except KeyError:
            raise LookupError(f"unknown selection {selection_id!r}") from None

    def add_matrix(
        self, ds: DatasetState, matrix: CorrelationMatrix, default_order: str
    ) -> MatrixState:
        ms = MatrixState(
            id=self._token("mx"),
            dataset_id=ds.id,
            matrix=matrix,
            default_order=default_order,
        )
        with self._lock:
            self.matrices[ms.id] = ms
        return ms

    def matrix(self, matrix_id: str) -> MatrixState:
        try:
            return self.matrices[matrix_id]
        except KeyError:
            raise LookupError(f"unknown correlation matrix {matrix_id!r}") from None
