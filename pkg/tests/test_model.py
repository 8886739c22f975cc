import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flowscope.model import (
    SELECTIVITY_TABLE,
    AttackClass,
    FlowRecord,
    KeySchema,
    Selectivity,
    StreamKey,
    failure_delta,
    ip_octets,
    key_of,
    selectivity,
)
from tests.conftest import random_records


def make_record(**kw) -> FlowRecord:
    base = dict(ts=0, sip="20.167.73.89", dip="10.0.0.1", sport=4432,
                dport=1025, syn=3, synack=0)
    base.update(kw)
    return FlowRecord(**base)


class TestKeyOf:
    def test_sip_dport_projection(self):
        key = key_of(make_record(), KeySchema.SIP_DPORT)
        assert key.field_a == "20.167.73.89"
        assert key.field_b == 1025
        assert str(key) == "20.167.73.89->1025"

    def test_dip_dport_projection(self):
        key = key_of(make_record(), KeySchema.DIP_DPORT)
        assert (key.field_a, key.field_b) == ("10.0.0.1", 1025)

    def test_sip_dip_projection(self):
        key = key_of(make_record(), KeySchema.SIP_DIP)
        assert (key.field_a, key.field_b) == ("20.167.73.89", "10.0.0.1")

    def test_partition_matches_brute_force_grouping(self):
        rng = random.Random(7)
        records = random_records(rng, 1000)
        keys = {key_of(r, KeySchema.SIP_DIP) for r in records}
        pairs = {(r.sip, r.dip) for r in records}
        assert {(k.field_a, k.field_b) for k in keys} == pairs

    def test_depends_only_on_named_fields(self):
        a = make_record(sport=1, syn=9, synack=2, ts=55)
        b = make_record(sport=60000, syn=0, synack=0, ts=0)
        assert key_of(a, KeySchema.SIP_DPORT) == key_of(b, KeySchema.SIP_DPORT)


class TestFailureDelta:
    def test_balanced(self):
        assert failure_delta(5, 5) == 0

    def test_flood_magnitude(self):
        assert failure_delta(1001, 1) == 1000

    def test_negative(self):
        assert failure_delta(3, 7) == -4

    @given(st.integers(0, 10**6), st.integers(0, 10**6))
    def test_antisymmetry(self, a, b):
        assert failure_delta(a, b) + failure_delta(b, a) == 0

    def test_rejects_negative_counts(self):
        with pytest.raises(ValueError):
            failure_delta(-1, 0)
        with pytest.raises(ValueError):
            failure_delta(0, -2)


class TestSelectivity:
    def test_paper_examples(self):
        assert selectivity(KeySchema.DIP_DPORT, AttackClass.SYN_FLOOD) is Selectivity.YES
        assert selectivity(KeySchema.SIP_DPORT, AttackClass.VERTICAL_SCAN) is Selectivity.NO
        assert selectivity(KeySchema.SIP_DIP, AttackClass.HORIZONTAL_SCAN) is Selectivity.NO

    def test_two_field_rows_complete(self):
        for schema in KeySchema:
            for attack in AttackClass:
                assert selectivity(schema, attack) in set(Selectivity)

    def test_single_field_reference_rows_present(self):
        # single-field keys are reference rows only, not valid dataset schemas
        for name in ("sip", "dip", "dport"):
            assert set(SELECTIVITY_TABLE[name]) == set(AttackClass)
        assert SELECTIVITY_TABLE["dport"][AttackClass.VERTICAL_SCAN] is Selectivity.NO
        assert SELECTIVITY_TABLE["sip"][AttackClass.SYN_FLOOD] is Selectivity.PART_NON_SPOOFED


class TestStreamKey:
    def test_field_types_checked(self):
        with pytest.raises(ValueError):
            StreamKey(KeySchema.SIP_DPORT, "1.2.3.4", "not-a-port")
        with pytest.raises(ValueError):
            StreamKey(KeySchema.SIP_DIP, "1.2.3.4", 80)
        with pytest.raises(ValueError):
            StreamKey(KeySchema.DIP_DPORT, "1.2.3.4", 70000)

    def test_sort_key_orders_by_octets_not_strings(self):
        a = StreamKey(KeySchema.SIP_DPORT, "2.0.0.1", 80)
        b = StreamKey(KeySchema.SIP_DPORT, "10.0.0.1", 80)
        assert a.sort_key() < b.sort_key()

    def test_port_breaks_ties(self):
        a = StreamKey(KeySchema.SIP_DPORT, "2.0.0.1", 80)
        b = StreamKey(KeySchema.SIP_DPORT, "2.0.0.1", 443)
        assert a.sort_key() < b.sort_key()


class TestValidation:
    def test_ip_octets(self):
        assert ip_octets("20.167.73.89") == (20, 167, 73, 89)
        for bad in ("", "1.2.3", "1.2.3.4.5", "256.0.0.1", "a.b.c.d", "1..2.3"):
            with pytest.raises(ValueError):
                ip_octets(bad)

    def test_record_invariants(self):
        with pytest.raises(ValueError):
            make_record(ts=-1)
        with pytest.raises(ValueError):
            make_record(dport=65536)
        with pytest.raises(ValueError):
            make_record(syn=-1)
        with pytest.raises(ValueError):
            make_record(synack=-1)

    def test_schema_parse(self):
        assert KeySchema.parse("sip-dport") is KeySchema.SIP_DPORT
        with pytest.raises(ValueError):
            KeySchema.parse("sport-dport")
