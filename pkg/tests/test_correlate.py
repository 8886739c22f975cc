import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowscope.aggregate import build_streams, dense_values
from flowscope.correlate import (
    MATRIX_CAP,
    ORDER_UNWEIGHTED,
    ORDER_WEIGHTED,
    CorrelationError,
    brush_rows,
    correlation_matrix,
    order_by_correlation,
    pearson,
    render_matrix,
    window_buckets,
)
from flowscope.model import FlowRecord, KeySchema
from tests.conftest import random_records


def rec(ts, syn, synack=0, sip="1.2.3.4", dport=80):
    return FlowRecord(ts=ts, sip=sip, dip="10.0.0.1", sport=7, dport=dport,
                      syn=syn, synack=synack)


def set_from_columns(columns):
    """One stream per column dict {minute: syn_count}, keyed by source port."""
    records = []
    for i, col in enumerate(columns):
        sip = "1.2.3.%d" % (i + 1)
        for minute, syn in col.items():
            records.append(rec(minute * 60, syn, sip=sip))
        records.append(rec(0, 5, sip=sip, dport=81))  # keep every column present
    return build_streams(records, KeySchema.SIP_DPORT)


def pure_pearson(xs, ys):
    """Textbook two-pass computation, kept free of the library's shortcuts."""
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    return sxy / math.sqrt(sxx * syy)


class TestWindow:
    def test_full_range(self):
        sset = build_streams([rec(0, 9), rec(240, 9)], KeySchema.SIP_DPORT)
        assert window_buckets(sset, sset.t0, sset.t1) == (0, 5)

    def test_partial_overlap_clamps(self):
        sset = build_streams([rec(0, 9), rec(240, 9)], KeySchema.SIP_DPORT)
        assert window_buckets(sset, 70.0, 130.0) == (1, 3)
        assert window_buckets(sset, -500.0, 65.0) == (0, 2)

    def test_outside_errors(self):
        sset = build_streams([rec(0, 9)], KeySchema.SIP_DPORT)
        with pytest.raises(CorrelationError):
            window_buckets(sset, 900.0, 1000.0)
        with pytest.raises(CorrelationError):
            window_buckets(sset, 50.0, 50.0)


class TestPearson:
    def test_self_correlation_is_exactly_one(self):
        rng = random.Random(61)
        records = random_records(rng, 1000)
        sset = build_streams(records, KeySchema.SIP_DPORT)
        s = sset.streams[0]
        assert pearson(sset, s, s, sset.t0, sset.t1) == 1.0

    def test_identical_shape_scaled(self):
        sset = set_from_columns([
            {0: 1, 1: 2, 2: 3, 3: 4},
            {0: 2, 1: 4, 2: 6, 3: 8},
        ])
        a, b = sset.streams[0], sset.streams[2]
        assert a.key.field_b == 80 and b.key.field_b == 80
        assert pearson(sset, a, b, sset.t0, sset.t1) == pytest.approx(1.0)

    def test_opposed_shapes(self):
        sset = set_from_columns([
            {0: 10, 1: 20, 2: 30, 3: 40},
            {0: 40, 1: 30, 2: 20, 3: 10},
        ])
        a, b = sset.streams[0], sset.streams[2]
        r = pearson(sset, a, b, sset.t0, sset.t1)
        assert r == pytest.approx(-1.0)

    def test_constant_stream_gives_zero(self):
        sset = set_from_columns([
            {0: 3, 1: 3, 2: 3, 3: 3},
            {0: 1, 1: 5, 2: 2, 3: 9},
        ])
        a, b = sset.streams[0], sset.streams[2]
        assert pearson(sset, a, b, sset.t0, sset.t1) == 0.0

    def test_matches_two_pass_oracle(self):
        rng = random.Random(62)
        records = random_records(rng, 8000, hosts=30)
        sset = build_streams(records, KeySchema.SIP_DIP)
        lo, hi = window_buckets(sset, sset.t0, sset.t1)
        streams = sset.streams
        assert len(streams) >= 15
        checked = 0
        for _ in range(100):
            a, b = rng.choice(streams), rng.choice(streams)
            if a is b:
                continue
            got = pearson(sset, a, b, sset.t0, sset.t1)
            want = pure_pearson(dense_values(a, lo, hi).tolist(),
                                dense_values(b, lo, hi).tolist())
            assert got == pytest.approx(want, abs=1e-9)
            checked += 1
        assert checked >= 80


class TestMatrix:
    def test_two_identical_streams(self):
        sset = set_from_columns([
            {0: 1, 1: 2, 2: 3},
            {0: 1, 1: 2, 2: 3},
        ])
        ids = [s.id for s in sset.streams if s.key.field_b == 80]
        m = correlation_matrix(sset, sset.t0, sset.t1, ids)
        assert np.allclose(m.r, [[1.0, 1.0], [1.0, 1.0]])

    def test_symmetry_is_exact(self):
        rng = random.Random(63)
        records = random_records(rng, 6000, hosts=25)
        sset = build_streams(records, KeySchema.SIP_DIP)
        m = correlation_matrix(sset, sset.t0, sset.t1)
        assert np.array_equal(m.r, m.r.T)
        assert (np.diag(m.r) == 1.0).all()
        assert (np.abs(m.r) <= 1.0).all()

    def test_matches_pairwise_pearson(self):
        rng = random.Random(64)
        records = random_records(rng, 3000, hosts=10)
        sset = build_streams(records, KeySchema.SIP_DIP)
        m = correlation_matrix(sset, sset.t0, sset.t1)
        streams = [sset.stream(i) for i in m.stream_ids]
        for i in range(m.n):
            for j in range(i + 1, m.n):
                want = pearson(sset, streams[i], streams[j], sset.t0, sset.t1)
                assert m.r[i, j] == pytest.approx(want, abs=1e-12)

    def test_errors(self):
        sset = set_from_columns([{0: 1, 1: 2}])
        only = [s.id for s in sset.streams if s.key.field_b == 80]
        with pytest.raises(CorrelationError):
            correlation_matrix(sset, sset.t0, sset.t1, only)
        both = [s.id for s in sset.streams]
        with pytest.raises(CorrelationError):
            correlation_matrix(sset, sset.t0, sset.t1, both + both)
        with pytest.raises(CorrelationError):
            correlation_matrix(sset, sset.t0, sset.t1, both, cap=1)
        assert MATRIX_CAP >= 2


def clustered_set(rng, sizes, n_minutes=64):
    """Streams in len(sizes) groups; within a group, copies of one shape."""
    shapes = []
    for _ in sizes:
        shapes.append([rng.randint(1, 30) for _ in range(n_minutes)])
    columns = []
    membership = []
    for g, size in enumerate(sizes):
        for _ in range(size):
            jitter = {m: max(1, v + rng.randint(0, 1))
                      for m, v in enumerate(shapes[g])}
            columns.append(jitter)
            membership.append(g)
    records = []
    for i, col in enumerate(columns):
        sip = "9.%d.%d.1" % (i // 200, i % 200 + 1)
        for minute, syn in col.items():
            records.append(rec(minute * 60, syn, sip=sip))
    sset = build_streams(records, KeySchema.SIP_DPORT)
    assert len(sset.streams) == len(columns)
    by_sip = {s.key.field_a: s.id for s in sset.streams}
    groups = {}
    for i, g in enumerate(membership):
        sip = "9.%d.%d.1" % (i // 200, i % 200 + 1)
        groups.setdefault(g, set()).add(by_sip[sip])
    return sset, groups


class TestOrdering:
    @pytest.mark.parametrize("mode", [ORDER_WEIGHTED, ORDER_UNWEIGHTED])
    def test_clusters_come_out_contiguous(self, mode):
        rng = random.Random(65)
        sset, groups = clustered_set(rng, [10, 10, 10])
        m = correlation_matrix(sset, sset.t0, sset.t1)
        ordering = order_by_correlation(m, mode)
        assert not ordering.degenerate
        # map display rows back to groups and demand single runs
        row_groups = []
        for row in ordering.perm:
            sid = m.stream_ids[row]
            for g, ids in groups.items():
                if sid in ids:
                    row_groups.append(g)
                    break
        seen = []
        for g in row_groups:
            if not seen or seen[-1] != g:
                seen.append(g)
        assert len(row_groups) == 30
        assert len(seen) == 3

    def test_permutation_is_bijection(self):
        rng = random.Random(66)
        sset, _ = clustered_set(rng, [4, 5])
        m = correlation_matrix(sset, sset.t0, sset.t1)
        for mode in (ORDER_WEIGHTED, ORDER_UNWEIGHTED):
            ordering = order_by_correlation(m, mode)
            assert sorted(ordering.perm) == list(range(m.n))
            assert len(ordering.angles) == m.n
            assert all(-math.pi < a <= math.pi for a in ordering.angles)

    def test_bad_mode(self):
        rng = random.Random(67)
        sset, _ = clustered_set(rng, [2, 2])
        m = correlation_matrix(sset, sset.t0, sset.t1)
        with pytest.raises(CorrelationError):
            order_by_correlation(m, "fancy")


class TestRenderMatrix:
    def small_matrix(self):
        sset = set_from_columns([
            {0: 1, 1: 2, 2: 3, 3: 4},
            {0: 2, 1: 4, 2: 6, 3: 8},
            {0: 4, 1: 3, 2: 2, 3: 1},
        ])
        ids = [s.id for s in sset.streams if s.key.field_b == 80]
        return correlation_matrix(sset, sset.t0, sset.t1, ids)

    def test_extreme_cells(self):
        m = self.small_matrix()
        ordering = order_by_correlation(m)
        img = render_matrix(m, ordering, size_px=3)
        assert img.shape == (3, 3, 3)
        # r=+1 between the two proportional streams renders solid green
        pos = [(i, j) for i in range(3) for j in range(3)
               if m.r[ordering.perm[i], ordering.perm[j]] > 0.99]
        for i, j in pos:
            assert img[i, j].tolist() == [0, 255, 0]
        neg = [(i, j) for i in range(3) for j in range(3)
               if m.r[ordering.perm[i], ordering.perm[j]] < -0.99]
        assert neg
        for i, j in neg:
            assert img[i, j, 0] == 255
            assert img[i, j, 1] == 0

    def test_zero_is_black(self):
        sset = set_from_columns([
            {0: 3, 1: 3, 2: 3, 3: 3},
            {0: 1, 1: 5, 2: 2, 3: 9},
        ])
        ids = [s.id for s in sset.streams if s.key.field_b == 80]
        m = correlation_matrix(sset, sset.t0, sset.t1, ids)
        img = render_matrix(m, order_by_correlation(m), size_px=2)
        flat = {tuple(img[i, j]) for i in range(2) for j in range(2)}
        assert (0, 0, 0) in flat

    def test_downscale_keeps_largest_magnitude(self):
        rng = random.Random(68)
        sset, _ = clustered_set(rng, [4, 4])
        m = correlation_matrix(sset, sset.t0, sset.t1)
        ordering = order_by_correlation(m)
        size = 4
        img = render_matrix(m, ordering, size)
        n = m.n
        for bi in range(size):
            for bj in range(size):
                rows = range((bi * n) // size, max((bi * n) // size + 1,
                                                   ((bi + 1) * n) // size))
                cols = range((bj * n) // size, max((bj * n) // size + 1,
                                                   ((bj + 1) * n) // size))
                block = [m.r[ordering.perm[i], ordering.perm[j]]
                         for i in rows for j in cols]
                v = max(block, key=abs)
                intensity = min(255, round(abs(v) * 255))
                want = (0, intensity, 0) if v >= 0 else (intensity, 0, 0)
                assert tuple(img[bi, bj]) == want

    def test_upscale_paints_blocks(self):
        m = self.small_matrix()
        img = render_matrix(m, order_by_correlation(m), size_px=9)
        assert img.shape == (9, 9, 3)
        assert (img[0:3, 0:3] == img[0, 0]).all()


class TestBrush:
    def test_row_range_maps_to_stream_ids(self):
        rng = random.Random(69)
        sset, groups = clustered_set(rng, [5, 5])
        m = correlation_matrix(sset, sset.t0, sset.t1)
        ordering = order_by_correlation(m)
        sel = brush_rows(m, ordering, 0, m.n - 1)
        assert sorted(sel.stream_ids) == sorted(m.stream_ids)

    def test_single_row(self):
        rng = random.Random(70)
        sset, _ = clustered_set(rng, [3, 3])
        m = correlation_matrix(sset, sset.t0, sset.t1)
        ordering = order_by_correlation(m)
        sel = brush_rows(m, ordering, 2, 2)
        assert sel.stream_ids == (m.stream_ids[ordering.perm[2]],)

    def test_out_of_range(self):
        rng = random.Random(71)
        sset, _ = clustered_set(rng, [3, 3])
        m = correlation_matrix(sset, sset.t0, sset.t1)
        ordering = order_by_correlation(m)
        with pytest.raises(CorrelationError, match=r"outside"):
            brush_rows(m, ordering, 4, 9)
        with pytest.raises(CorrelationError):
            brush_rows(m, ordering, 3, 2)
