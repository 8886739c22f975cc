"""Windowed Pearson correlation across streams, with matrix reordering.

The matrix is computed over dense bucket vectors inside a time window
(absent buckets count as zero). Rows are reordered by projecting each
stream onto the top two eigenvectors of the correlation matrix and sorting
by the angle of that projection, which pulls correlated groups into
contiguous blocks. Brushing a row range maps display rows back to stream
ids for linked highlighting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aggregate import Stream, StreamSet, dense_matrix, dense_values
from .query import ORIGIN_BRUSH, SelectionSet

MATRIX_CAP = 2000

ORDER_WEIGHTED = "weighted"
ORDER_UNWEIGHTED = "unweighted"
ORDER_MODES = (ORDER_WEIGHTED, ORDER_UNWEIGHTED)


class CorrelationError(ValueError):
    pass


def window_buckets(stream_set: StreamSet, t_lo: float, t_hi: float) -> tuple[int, int]:
    """Half-open bucket index range covering the buckets that overlap
    [t_lo, t_hi). Raises when the window contains no buckets."""
    if not t_lo < t_hi:
        raise CorrelationError("correlation window is empty")
    w = stream_set.bucket_width_s
    lo = max(0, math.floor((t_lo - stream_set.t0) / w))
    hi = min(stream_set.n_buckets, math.ceil((t_hi - stream_set.t0) / w))
    if hi <= lo:
        raise CorrelationError("correlation window lies outside the dataset")
    return lo, hi


def pearson(
    stream_set: StreamSet,
    a: Stream,
    b: Stream,
    t_lo: float,
    t_hi: float,
) -> float:
    """Pearson coefficient of two streams over the window's dense vectors.

    Zero-variance vectors (constant, or entirely absent) correlate as 0
    with everything, themselves included.
    """
    lo, hi = window_buckets(stream_set, t_lo, t_hi)
    x = dense_values(a, lo, hi)
    y = dense_values(b, lo, hi)
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(xc @ xc)
    sy = float(yc @ yc)
    if sx == 0.0 or sy == 0.0:
        return 0.0
    if a is b:
        return 1.0
    r = float(xc @ yc) / math.sqrt(sx * sy)
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class CorrelationMatrix:
    n: int
    r: np.ndarray
    window: tuple[float, float]
    stream_ids: tuple[int, ...]


def correlation_matrix(
    stream_set: StreamSet,
    t_lo: float,
    t_hi: float,
    ids: tuple[int, ...] | list[int] | None = None,
    cap: int = MATRIX_CAP,
) -> CorrelationMatrix:
    """All-pairs Pearson matrix, exactly symmetric with unit diagonal.

    Each unordered pair is computed once and mirrored. Zero-variance rows
    are 0 off-diagonal; the diagonal is pinned to 1 throughout.
    """
    if ids is None:
        ids = tuple(s.id for s in stream_set.streams)
    else:
        ids = tuple(ids)
    if len(ids) < 2:
        raise CorrelationError("correlation needs at least 2 streams")
    if len(set(ids)) != len(ids):
        raise CorrelationError("duplicate stream ids")
    if len(ids) > cap:
        raise CorrelationError(
            f"{len(ids)} streams exceeds the {cap}-stream cap; select a subset"
        )
    lo, hi = window_buckets(stream_set, t_lo, t_hi)
    streams = [stream_set.stream(i) for i in ids]
    m = dense_matrix(streams, lo, hi)
    centered = m - m.mean(axis=1, keepdims=True)
    ss = np.einsum("ij,ij->i", centered, centered)
    live = ss > 0.0
    inv = np.zeros_like(ss)
    inv[live] = 1.0 / np.sqrt(ss[live])
    scaled = centered * inv[:, None]
    r = scaled @ scaled.T
    np.clip(r, -1.0, 1.0, out=r)
    r[~live, :] = 0.0
    r[:, ~live] = 0.0
    upper = np.triu(r, k=1)
    r = upper + upper.T
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(n=len(ids), r=r, window=(float(t_lo), float(t_hi)),
                             stream_ids=ids)


@dataclass(frozen=True)
class MatrixOrdering:
    """Display permutation (row position -> matrix index) and the angles
    that produced it. degenerate marks the identity fallback."""

    perm: tuple[int, ...]
    angles: tuple[float, ...]
    mode: str
    degenerate: bool = False


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    pivot = int(np.argmax(np.abs(vec)))
    return -vec if vec[pivot] < 0 else vec


def order_by_correlation(m: CorrelationMatrix, mode: str = ORDER_WEIGHTED) -> MatrixOrdering:
    """Radial eigenvector ordering of the matrix rows.

    Project each row onto the two leading eigenvectors (optionally scaled
    by the square roots of their eigenvalues) and sort by the atan2 angle
    of that projection, ties broken by original index. Degenerate inputs
    fall back to the identity permutation, flagged.
    """
    if mode not in ORDER_MODES:
        raise CorrelationError(f"unknown ordering mode {mode!r}")
    if m.n < 2:
        raise CorrelationError("ordering needs at least 2 streams")
    identity = tuple(range(m.n))
    try:
        eigvals, eigvecs = np.linalg.eigh(m.r)
    except np.linalg.LinAlgError:
        return MatrixOrdering(perm=identity, angles=(0.0,) * m.n, mode=mode,
                              degenerate=True)
    e1 = _fix_sign(eigvecs[:, -1])
    e2 = _fix_sign(eigvecs[:, -2])
    if mode == ORDER_WEIGHTED:
        w1 = math.sqrt(max(float(eigvals[-1]), 0.0))
        w2 = math.sqrt(max(float(eigvals[-2]), 0.0))
    else:
        w1 = w2 = 1.0
    angles = []
    for i in range(m.n):
        angle = math.atan2(e2[i] * w2, e1[i] * w1)
        if angle == -math.pi:
            angle = math.pi
        angles.append(angle)
    perm = tuple(sorted(range(m.n), key=lambda i: (angles[i], i)))
    return MatrixOrdering(perm=perm, angles=tuple(angles), mode=mode)


def render_matrix(m: CorrelationMatrix, ordering: MatrixOrdering, size_px: int) -> np.ndarray:
    """RGB raster of the permuted matrix, shape (size_px, size_px, 3).

    When several cells share a pixel the signed value of largest magnitude
    wins, so extreme correlations survive downscaling. Positive values
    render green, negative red, magnitude as channel intensity; zero is
    black.
    """
    if size_px < 1:
        raise CorrelationError("size_px must be >= 1")
    perm = np.array(ordering.perm)
    p = m.r[np.ix_(perm, perm)]
    n = m.n
    out = np.zeros((size_px, size_px, 3), dtype=np.uint8)
    bounds = [(i * n) // size_px for i in range(size_px + 1)]
    for i in range(size_px):
        r_lo, r_hi = bounds[i], max(bounds[i + 1], bounds[i] + 1)
        for j in range(size_px):
            c_lo, c_hi = bounds[j], max(bounds[j + 1], bounds[j] + 1)
            block = p[r_lo:r_hi, c_lo:c_hi]
            flat = int(np.argmax(np.abs(block)))
            value = float(block.flat[flat])
            channel = min(255, int(round(abs(value) * 255.0)))
            if value >= 0:
                out[i, j, 1] = channel
            else:
                out[i, j, 0] = channel
    return out


def brush_rows(
    m: CorrelationMatrix,
    ordering: MatrixOrdering,
    row_lo: int,
    row_hi: int,
    selection_id: str = "",
) -> SelectionSet:
    """Streams behind an inclusive range of display rows."""
    if not 0 <= row_lo <= row_hi < m.n:
        raise CorrelationError(
            f"brush rows [{row_lo}, {row_hi}] outside 0..{m.n - 1}"
        )
    ids = tuple(m.stream_ids[ordering.perm[i]] for i in range(row_lo, row_hi + 1))
    return SelectionSet(id=selection_id, stream_ids=ids, origin=ORIGIN_BRUSH)
