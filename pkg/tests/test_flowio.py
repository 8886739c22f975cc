import random

import pytest

from flowscope.flowio import (
    BENIGN_LABEL,
    FLOW_HEADER,
    FlowParseError,
    parse_flows,
    parse_labeled_flows,
    serialize_flows,
)
from flowscope.model import FlowRecord
from tests.conftest import random_records


def test_single_line_example():
    text = FLOW_HEADER + "\n0,20.167.73.89,10.0.0.1,4432,1025,3,0\n"
    records = parse_flows(text)
    assert records == [
        FlowRecord(ts=0, sip="20.167.73.89", dip="10.0.0.1",
                   sport=4432, dport=1025, syn=3, synack=0)
    ]


def test_header_only_gives_empty_list():
    assert parse_flows(FLOW_HEADER + "\n") == []


def test_round_trip_preserves_records():
    rng = random.Random(11)
    records = random_records(rng, 500)
    assert parse_flows(serialize_flows(records)) == records


def test_round_trip_with_labels():
    rng = random.Random(12)
    records = random_records(rng, 200)
    labels = [rng.choice(["benign", "scan-a", "flood-b"]) for _ in records]
    out, out_labels = parse_labeled_flows(serialize_flows(records, labels))
    assert out == records
    assert out_labels == labels


def test_unlabeled_input_defaults_to_benign():
    text = FLOW_HEADER + "\n5,1.2.3.4,10.0.0.1,99,80,1,1\n"
    records, labels = parse_labeled_flows(text)
    assert len(records) == 1
    assert labels == [BENIGN_LABEL]


def test_malformed_line_reports_line_number():
    rows = ["%d,1.2.3.4,10.0.0.1,99,80,1,0" % i for i in range(10)]
    rows[5] = "garbage"  # line 7 counting the header as line 1
    text = FLOW_HEADER + "\n" + "\n".join(rows) + "\n"
    with pytest.raises(FlowParseError) as exc:
        parse_flows(text)
    assert exc.value.line_no == 7
    assert "line 7" in str(exc.value)


def test_bad_field_value_reports_line():
    text = FLOW_HEADER + "\n0,1.2.3.4,10.0.0.1,99,80,1,0\n1,1.2.3.4,10.0.0.1,99,xx,1,0\n"
    with pytest.raises(FlowParseError) as exc:
        parse_flows(text)
    assert exc.value.line_no == 3


def test_bad_address_reports_line():
    text = FLOW_HEADER + "\n0,999.1.2.3,10.0.0.1,99,80,1,0\n"
    with pytest.raises(FlowParseError) as exc:
        parse_flows(text)
    assert exc.value.line_no == 2


def test_blank_lines_skipped():
    text = FLOW_HEADER + "\n\n0,1.2.3.4,10.0.0.1,99,80,1,0\n\n"
    assert len(parse_flows(text)) == 1


def test_bad_header_rejected():
    with pytest.raises(FlowParseError):
        parse_flows("ts,sip,dip\n")


def test_empty_input_rejected():
    with pytest.raises(FlowParseError):
        parse_flows("")


def test_serialized_header_round_trips():
    assert serialize_flows([]).strip() == FLOW_HEADER
