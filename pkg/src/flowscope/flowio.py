"""Flow CSV reading and writing.

Format: UTF-8, LF line endings, header ``ts,sip,dip,sport,dport,syn,synack``
followed by one record per line. An optional eighth column ``label`` carries
ground-truth tags from the scenario generator; the analysis pipeline never
reads it.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

from .model import FlowRecord, ip_octets

FLOW_FIELDS = ("ts", "sip", "dip", "sport", "dport", "syn", "synack")
FLOW_HEADER = ",".join(FLOW_FIELDS)
LABEL_FIELD = "label"
BENIGN_LABEL = "benign"


class FlowParseError(ValueError):
    """Malformed flow CSV; carries the 1-based line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


def _decode(data: bytes | str) -> str:
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FlowParseError(1, f"not valid UTF-8: {exc}") from None
    return data


def _parse_int(text: str, field: str, line_no: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise FlowParseError(line_no, f"field {field!r} is not an integer: {text!r}") from None


def parse_labeled_flows(data: bytes | str) -> tuple[list[FlowRecord], list[str]]:
    """Parse a flow CSV into records plus per-record labels.

    Records without a label column are tagged ``benign``. An empty input or
    a header-only file yields empty lists; a malformed line raises
    FlowParseError naming the line.
    """
    text = _decode(data)
    records: list[FlowRecord] = []
    labels: list[str] = []
    lines = text.split("\n")
    header_seen = False
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r")
        if not line:
            continue
        if not header_seen:
            fields = tuple(line.split(","))
            if fields != FLOW_FIELDS and fields != FLOW_FIELDS + (LABEL_FIELD,):
                raise FlowParseError(line_no, f"unexpected header {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) not in (7, 8):
            raise FlowParseError(line_no, f"expected 7 or 8 fields, got {len(parts)}")
        try:
            ip_octets(parts[1])
            ip_octets(parts[2])
        except ValueError as exc:
            raise FlowParseError(line_no, str(exc)) from None
        try:
            record = FlowRecord(
                ts=_parse_int(parts[0], "ts", line_no),
                sip=parts[1],
                dip=parts[2],
                sport=_parse_int(parts[3], "sport", line_no),
                dport=_parse_int(parts[4], "dport", line_no),
                syn=_parse_int(parts[5], "syn", line_no),
                synack=_parse_int(parts[6], "synack", line_no),
            )
        except ValueError as exc:
            if isinstance(exc, FlowParseError):
                raise
            raise FlowParseError(line_no, str(exc)) from None
        records.append(record)
        labels.append(parts[7] if len(parts) == 8 else BENIGN_LABEL)
    if not header_seen:
        raise FlowParseError(1, "missing header")
    return records, labels


def parse_flows(data: bytes | str) -> list[FlowRecord]:
    """Parse a flow CSV, discarding any label column."""
    records, _ = parse_labeled_flows(data)
    return records


def serialize_flows(
    records: Iterable[FlowRecord],
    labels: Sequence[str] | None = None,
) -> str:
    """Write records (optionally labeled) back to the flow CSV format."""
    record_list = list(records)
    if labels is not None and len(labels) != len(record_list):
        raise ValueError("labels must match records one-to-one")
    header = FLOW_HEADER + ("," + LABEL_FIELD if labels is not None else "")
    out = [header]
    for i, r in enumerate(record_list):
        line = f"{r.ts},{r.sip},{r.dip},{r.sport},{r.dport},{r.syn},{r.synack}"
        if labels is not None:
            line += f",{labels[i]}"
        out.append(line)
    out.append("")
    return "\n".join(out)
