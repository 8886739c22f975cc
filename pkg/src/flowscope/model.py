"""Flow records, stream keys, and the failed-connection metric.

Everything in this module is an immutable value type. A flow record is one
unidirectional observation with SYN / SYN-ACK counters; a stream key is the
projection of a record onto one of the two-field keying schemes; the failure
delta (SYN minus SYN-ACK) is the anomaly metric the whole pipeline plots,
thresholds, and correlates.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class KeySchema(enum.Enum):
    """Two-field keying schemes a dataset can be built on.

    Single-field keys exist in the selectivity table for reference but are
    not buildable: they are too coarse to isolate individual attacks.
    """

    SIP_DPORT = "sip-dport"
    DIP_DPORT = "dip-dport"
    SIP_DIP = "sip-dip"

    @classmethod
    def parse(cls, text: str) -> KeySchema:
        for schema in cls:
            if schema.value == text:
                return schema
        raise ValueError(
            f"unknown key schema {text!r}; expected one of "
            + ", ".join(s.value for s in cls)
        )


class AttackClass(enum.Enum):
    SYN_FLOOD = "syn-flood"
    HORIZONTAL_SCAN = "horizontal-scan"
    VERTICAL_SCAN = "vertical-scan"
    BLOCK_SCAN = "block-scan"

    @classmethod
    def parse(cls, text: str) -> AttackClass:
        for ac in cls:
            if ac.value == text:
                return ac
        raise ValueError(f"unknown attack class {text!r}")


class Selectivity(enum.Enum):
    """Whether a key scheme isolates an attack class as a single hot stream."""

    YES = "yes"
    NO = "no"
    PART_NON_SPOOFED = "part-non-spoofed"


def ip_octets(ip: str) -> tuple[int, int, int, int]:
    """Parse a dotted-quad IPv4 address; raises ValueError on anything else."""
    parts = ip.split(".")
    if len(parts) != 4:
        raise ValueError(f"invalid IPv4 address {ip!r}")
    octets = []
    for part in parts:
        if not part.isdigit():
            raise ValueError(f"invalid IPv4 address {ip!r}")
        value = int(part)
        if value > 255:
            raise ValueError(f"invalid IPv4 address {ip!r}")
        octets.append(value)
    return tuple(octets)  # type: ignore[return-value]


@dataclass(frozen=True)
class FlowRecord:
    """One unidirectional flow observation.

    ts is integer seconds since the start of the capture epoch. syn and
    synack are per-record aggregate counts; their difference is the number
    of connection attempts that never completed the handshake.
    """

    ts: int
    sip: str
    dip: str
    sport: int
    dport: int
    syn: int
    synack: int

    def __post_init__(self) -> None:
        if self.ts < 0:
            raise ValueError(f"ts must be >= 0, got {self.ts}")
        if not 0 <= self.sport <= 65535:
            raise ValueError(f"sport out of range: {self.sport}")
        if not 0 <= self.dport <= 65535:
            raise ValueError(f"dport out of range: {self.dport}")
        if self.syn < 0 or self.synack < 0:
            raise ValueError("syn and synack counts must be >= 0")


@dataclass(frozen=True)
class StreamKey:
    """A record projected onto the two fields named by its schema.

    field_a is always the address-valued field; field_b is a port for the
    sip-dport and dip-dport schemas and a second address for sip-dip.
    """

    schema: KeySchema
    field_a: str
    field_b: str | int

    def __post_init__(self) -> None:
        ip_octets(self.field_a)
        if self.schema is KeySchema.SIP_DIP:
            if not isinstance(self.field_b, str):
                raise ValueError("sip-dip keys need an address in field_b")
            ip_octets(self.field_b)
        else:
            if not isinstance(self.field_b, int):
                raise ValueError(f"{self.schema.value} keys need a port in field_b")
            if not 0 <= self.field_b <= 65535:
                raise ValueError(f"port out of range: {self.field_b}")

    def sort_key(self) -> tuple:
        if isinstance(self.field_b, str):
            return (ip_octets(self.field_a), ip_octets(self.field_b))
        return (ip_octets(self.field_a), (self.field_b,))

    def __str__(self) -> str:
        return f"{self.field_a}->{self.field_b}"


def key_of(record: FlowRecord, schema: KeySchema) -> StreamKey:
    """Project a record onto the schema's two fields. Pure and deterministic."""
    if schema is KeySchema.SIP_DPORT:
        return StreamKey(schema, record.sip, record.dport)
    if schema is KeySchema.DIP_DPORT:
        return StreamKey(schema, record.dip, record.dport)
    if schema is KeySchema.SIP_DIP:
        return StreamKey(schema, record.sip, record.dip)
    raise ValueError(f"unknown schema {schema!r}")


def failure_delta(syn: int, synack: int) -> int:
    """Failed-connection count for one observation: syn minus synack.

    May be negative; clamping negatives is the plot transform's job, not
    this metric's.
    """
    if syn < 0 or synack < 0:
        raise ValueError("counts must be >= 0")
    return syn - synack


_YES = Selectivity.YES
_NO = Selectivity.NO
_PART = Selectivity.PART_NON_SPOOFED

# Full selectivity reference, including the single-field keys that are not
# valid dataset schemas. Row key "sip-dport" etc. matches KeySchema values.
SELECTIVITY_TABLE: dict[str, dict[AttackClass, Selectivity]] = {
    "sip-dport": {
        AttackClass.SYN_FLOOD: _PART,
        AttackClass.HORIZONTAL_SCAN: _YES,
        AttackClass.VERTICAL_SCAN: _NO,
        AttackClass.BLOCK_SCAN: _YES,
    },
    "dip-dport": {
        AttackClass.SYN_FLOOD: _YES,
        AttackClass.HORIZONTAL_SCAN: _NO,
        AttackClass.VERTICAL_SCAN: _NO,
        AttackClass.BLOCK_SCAN: _NO,
    },
    "sip-dip": {
        AttackClass.SYN_FLOOD: _PART,
        AttackClass.HORIZONTAL_SCAN: _NO,
        AttackClass.VERTICAL_SCAN: _YES,
        AttackClass.BLOCK_SCAN: _YES,
    },
    "sip": {
        AttackClass.SYN_FLOOD: _PART,
        AttackClass.HORIZONTAL_SCAN: _YES,
        AttackClass.VERTICAL_SCAN: _YES,
        AttackClass.BLOCK_SCAN: _YES,
    },
    "dip": {
        AttackClass.SYN_FLOOD: _YES,
        AttackClass.HORIZONTAL_SCAN: _NO,
        AttackClass.VERTICAL_SCAN: _YES,
        AttackClass.BLOCK_SCAN: _YES,
    },
    "dport": {
        AttackClass.SYN_FLOOD: _YES,
        AttackClass.HORIZONTAL_SCAN: _YES,
        AttackClass.VERTICAL_SCAN: _NO,
        AttackClass.BLOCK_SCAN: _YES,
    },
}


def selectivity(schema: KeySchema, attack: AttackClass) -> Selectivity:
    """Look up how well a buildable key scheme isolates an attack class."""
    return SELECTIVITY_TABLE[schema.value][attack]
