"""Synthetic attack scenario generation with ground-truth labels.

A scenario is benign background traffic plus a list of attack specs. Every
record carries a label (``benign`` or the attack id) in a sidecar column so
tests can score detection; the analysis pipeline itself never reads labels.

Generation is fully deterministic for a given spec: the scenario seed plus
each attack's position and id derive independent generators, and the final
record list is sorted by a total order over all fields.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Iterable

from .flowio import BENIGN_LABEL
from .model import AttackClass, FlowRecord, KeySchema, StreamKey, ip_octets, key_of


class ScenarioError(ValueError):
    """A scenario spec that cannot be generated as stated."""


# Benign traffic model: Poisson arrivals per host; most flows complete the
# handshake, a small fraction lose one or two connection attempts. Per-key
# failure totals are hard-capped far below detection thresholds so ground
# truth stays unambiguous.
BENIGN_FAILURE_RATE = 0.05
BENIGN_FAILURE_CAP = 300
BENIGN_SERVERS = tuple(f"10.2.0.{i}" for i in range(1, 13))
BENIGN_PORTS = (80, 443, 53, 22, 123, 993, 8080, 110)

# Sustained attacks wobble around their nominal rate minute to minute.
RATE_JITTER = 0.1


@dataclass(frozen=True)
class AttackSpec:
    """One labeled attack campaign.

    Scan classes take exactly one source address; a multi-source campaign is
    a list of specs sharing an id prefix. Floods take either an explicit
    spoofed-source list or a /24 subnet prefix, optionally rotating through
    the subnet at a fixed period so only one source is live at a time.

    intensity is failed connections per minute for the records this spec
    emits. burst_period_s switches the attack from sustained emission to
    periodic bursts of burst_len_s seconds; each burst's failure total is
    the nominal per-burst budget reduced by up to burst_jitter. ramp tilts
    the sustained rate linearly from (1-ramp)x at start to (1+ramp)x at end,
    for campaigns that grow as they spread.
    """

    attack_id: str
    attack_class: AttackClass
    start_s: int
    end_s: int
    source_ips: tuple[str, ...] = ()
    source_subnet: str | None = None
    rotation_period_s: int | None = None
    target_ips: tuple[str, ...] = ()
    target_ports: tuple[int, ...] = ()
    intensity: float = 60.0
    burst_period_s: int | None = None
    burst_len_s: int = 300
    burst_jitter: float = 0.125
    ramp: float = 0.0


@dataclass(frozen=True)
class ScenarioSpec:
    duration_s: int
    benign_hosts: int
    benign_rate: float
    attacks: tuple[AttackSpec, ...] = ()
    seed: int = 0


def _validate_attack(attack: AttackSpec, duration_s: int) -> None:
    aid = attack.attack_id
    if not aid:
        raise ScenarioError("attack id must be non-empty")
    if not 0 <= attack.start_s < attack.end_s <= duration_s:
        raise ScenarioError(f"attack {aid!r}: window must satisfy 0 <= start < end <= duration")
    if attack.intensity <= 0:
        raise ScenarioError(f"attack {aid!r}: intensity must be > 0")
    if attack.burst_period_s is not None:
        if attack.burst_period_s <= 0 or not 0 < attack.burst_len_s <= attack.burst_period_s:
            raise ScenarioError(f"attack {aid!r}: burst lengths must fit inside the period")
    if not 0.0 <= attack.burst_jitter < 1.0 or not 0.0 <= attack.ramp <= 1.0:
        raise ScenarioError(f"attack {aid!r}: jitter and ramp must be in [0, 1)")
    for ip in attack.source_ips + attack.target_ips:
        ip_octets(ip)
    if attack.source_subnet is not None:
        parts = attack.source_subnet.split(".")
        if len(parts) != 3 or any(not p.isdigit() or int(p) > 255 for p in parts):
            raise ScenarioError(f"attack {aid!r}: source_subnet must be a 3-octet prefix")
    for port in attack.target_ports:
        if not 0 <= port <= 65535:
            raise ScenarioError(f"attack {aid!r}: port out of range: {port}")

    cls = attack.attack_class
    if cls is AttackClass.SYN_FLOOD:
        if len(attack.target_ips) != 1 or len(attack.target_ports) != 1:
            raise ScenarioError(f"attack {aid!r}: floods hit exactly one (dip, dport)")
        if not attack.source_ips and attack.source_subnet is None:
            raise ScenarioError(f"attack {aid!r}: floods need spoofed sources or a subnet")
        if attack.rotation_period_s is not None and attack.source_subnet is None:
            raise ScenarioError(f"attack {aid!r}: rotation requires a source subnet")
    else:
        if len(attack.source_ips) != 1 or attack.source_subnet is not None:
            raise ScenarioError(f"attack {aid!r}: scans use exactly one real source")
        if cls is AttackClass.HORIZONTAL_SCAN:
            if len(attack.target_ports) != 1 or len(attack.target_ips) < 2:
                raise ScenarioError(f"attack {aid!r}: horizontal scans hit one port on many hosts")
        elif cls is AttackClass.VERTICAL_SCAN:
            if len(attack.target_ips) != 1 or len(attack.target_ports) < 2:
                raise ScenarioError(f"attack {aid!r}: vertical scans hit many ports on one host")
        elif cls is AttackClass.BLOCK_SCAN:
            if not attack.target_ips or not attack.target_ports:
                raise ScenarioError(f"attack {aid!r}: block scans need hosts and ports")


def _validate(spec: ScenarioSpec) -> None:
    if spec.duration_s <= 0:
        raise ScenarioError("duration_s must be > 0")
    if spec.benign_hosts < 0 or spec.benign_rate < 0:
        raise ScenarioError("benign host count and rate must be >= 0")
    for attack in spec.attacks:
        _validate_attack(attack, spec.duration_s)
    by_id: dict[str, list[AttackSpec]] = defaultdict(list)
    for attack in spec.attacks:
        for other in by_id[attack.attack_id]:
            if attack.start_s < other.end_s and other.start_s < attack.end_s:
                raise ScenarioError(
                    f"attack id {attack.attack_id!r} has overlapping time windows"
                )
        by_id[attack.attack_id].append(attack)


def _benign_rows(spec: ScenarioSpec, rng: random.Random) -> list[tuple[FlowRecord, str]]:
    rows: list[tuple[FlowRecord, str]] = []
    if spec.benign_hosts == 0 or spec.benign_rate == 0:
        return rows
    rate_per_s = spec.benign_rate / 60.0
    # Cumulative failures per projected key, for the hard cap.
    spent: dict[tuple, int] = defaultdict(int)
    for h in range(spec.benign_hosts):
        sip = f"10.1.{h // 200}.{h % 200 + 1}"
        t = 0.0
        while True:
            t += rng.expovariate(rate_per_s)
            if t >= spec.duration_s:
                break
            dip = rng.choice(BENIGN_SERVERS)
            dport = rng.choice(BENIGN_PORTS)
            syn = rng.randint(1, 3)
            synack = syn
            if rng.random() < BENIGN_FAILURE_RATE:
                deficit = rng.randint(1, 2)
                keys = ((sip, dport), (dip, dport), (sip, dip))
                if all(spent[k] + deficit <= BENIGN_FAILURE_CAP for k in keys):
                    for k in keys:
                        spent[k] += deficit
                    syn = max(syn, deficit)
                    synack = syn - deficit
            rows.append((
                FlowRecord(
                    ts=int(t),
                    sip=sip,
                    dip=dip,
                    sport=rng.randint(1024, 65535),
                    dport=dport,
                    syn=syn,
                    synack=synack,
                ),
                BENIGN_LABEL,
            ))
    return rows


def _spoofed_sip(attack: AttackSpec, rng: random.Random, ts: int, rotation: list[int]) -> str:
    if attack.source_subnet is not None:
        if attack.rotation_period_s is not None:
            slot = (ts - attack.start_s) // attack.rotation_period_s
            return f"{attack.source_subnet}.{rotation[slot % len(rotation)]}"
        return f"{attack.source_subnet}.{rng.randint(2, 249)}"
    return rng.choice(attack.source_ips)


def _emit_window(
    rows: list[tuple[FlowRecord, str]],
    attack: AttackSpec,
    rng: random.Random,
    rotation: list[int],
    total_failures: int,
    t_lo: int,
    t_hi: int,
) -> None:
    """Emit attack records whose failure deltas sum to exactly total_failures."""
    flood = attack.attack_class is AttackClass.SYN_FLOOD
    syn_lo, syn_hi = (8, 24) if flood else (1, 3)
    emitted = 0
    while emitted < total_failures:
        syn = min(rng.randint(syn_lo, syn_hi), total_failures - emitted)
        ts = t_lo + int(rng.random() * (t_hi - t_lo))
        if flood:
            dip = attack.target_ips[0]
            dport = attack.target_ports[0]
            sip = _spoofed_sip(attack, rng, ts, rotation)
        elif attack.attack_class is AttackClass.HORIZONTAL_SCAN:
            sip = attack.source_ips[0]
            dport = attack.target_ports[0]
            dip = rng.choice(attack.target_ips)
        elif attack.attack_class is AttackClass.VERTICAL_SCAN:
            sip = attack.source_ips[0]
            dip = attack.target_ips[0]
            dport = rng.choice(attack.target_ports)
        else:
            sip = attack.source_ips[0]
            dip = rng.choice(attack.target_ips)
            dport = rng.choice(attack.target_ports)
        rows.append((
            FlowRecord(
                ts=ts,
                sip=sip,
                dip=dip,
                sport=rng.randint(1024, 65535),
                dport=dport,
                syn=syn,
                synack=0,
            ),
            attack.attack_id,
        ))
        emitted += syn


def _attack_rows(spec: ScenarioSpec, index: int, attack: AttackSpec) -> list[tuple[FlowRecord, str]]:
    rng = random.Random(f"{spec.seed}:{index}:{attack.attack_id}")
    rotation = rng.sample(range(2, 250), 24)
    rows: list[tuple[FlowRecord, str]] = []
    if attack.burst_period_s is not None:
        nominal = attack.intensity * attack.burst_len_s / 60.0
        k = 0
        while attack.start_s + k * attack.burst_period_s + attack.burst_len_s <= attack.end_s:
            b0 = attack.start_s + k * attack.burst_period_s
            total = int(round(nominal * (1.0 - attack.burst_jitter * rng.random())))
            _emit_window(rows, attack, rng, rotation, total, b0, b0 + attack.burst_len_s)
            k += 1
        return rows
    span = attack.end_s - attack.start_s
    minute = attack.start_s // 60
    while minute * 60 < attack.end_s:
        a = max(attack.start_s, minute * 60)
        b = min(attack.end_s, (minute + 1) * 60)
        if b > a:
            progress = (a - attack.start_s) / span
            ramp_factor = 1.0 + attack.ramp * (2.0 * progress - 1.0)
            jitter = 1.0 - RATE_JITTER + 2.0 * RATE_JITTER * rng.random()
            total = int(round(attack.intensity * ((b - a) / 60.0) * ramp_factor * jitter))
            _emit_window(rows, attack, rng, rotation, total, a, b)
        minute += 1
    return rows


def _row_order(row: tuple[FlowRecord, str]) -> tuple:
    r, label = row
    return (r.ts, ip_octets(r.sip), ip_octets(r.dip), r.sport, r.dport, r.syn, r.synack, label)


def generate_scenario(spec: ScenarioSpec) -> tuple[list[FlowRecord], list[str]]:
    """Generate the scenario's records plus parallel ground-truth labels.

    Deterministic: the same spec always yields the identical record list.
    """
    _validate(spec)
    rows = _benign_rows(spec, random.Random(f"{spec.seed}:benign"))
    for i, attack in enumerate(spec.attacks):
        rows.extend(_attack_rows(spec, i, attack))
    rows.sort(key=_row_order)
    return [r for r, _ in rows], [label for _, label in rows]


def key_labels(
    records: Iterable[FlowRecord],
    labels: Iterable[str],
    schema: KeySchema,
) -> dict[StreamKey, set[str]]:
    """Every label observed on each stream key."""
    out: dict[StreamKey, set[str]] = defaultdict(set)
    for record, label in zip(records, labels):
        out[key_of(record, schema)].add(label)
    return dict(out)


def attack_keys(
    records: Iterable[FlowRecord],
    labels: Iterable[str],
    schema: KeySchema,
) -> dict[str, set[StreamKey]]:
    """Stream keys touched by each attack id (benign records excluded)."""
    out: dict[str, set[StreamKey]] = defaultdict(set)
    for record, label in zip(records, labels):
        if label != BENIGN_LABEL:
            out[label].add(key_of(record, schema))
    return dict(out)


def _worm_scan_spec() -> ScenarioSpec:
    sources = tuple(f"198.51.100.{10 + i}" for i in range(20))
    targets = tuple(f"10.3.0.{k}" for k in range(1, 201))
    attacks = tuple(
        AttackSpec(
            attack_id=f"worm-{i:02d}-{port}",
            attack_class=AttackClass.HORIZONTAL_SCAN,
            start_s=9000,
            end_s=10200,
            source_ips=(sip,),
            target_ips=targets,
            target_ports=(port,),
            intensity=24.0,
            ramp=0.8,
        )
        for i, sip in enumerate(sources)
        for port in (5554, 9898, 1023)
    )
    return ScenarioSpec(duration_s=18000, benign_hosts=20, benign_rate=3.0, attacks=attacks, seed=101)


def _block_scan_spec() -> ScenarioSpec:
    ports = (80, 81, 443, 444, 554, 1025, 1026, 1027, 1028, 1029, 1080,
             3128, 3380, 3382, 4471, 6588, 8000, 8002, 8080, 8081, 8888, 65506)
    attack = AttackSpec(
        attack_id="block-scan",
        attack_class=AttackClass.BLOCK_SCAN,
        start_s=4800,
        end_s=5700,
        source_ips=("172.16.40.89",),
        target_ips=tuple(f"10.4.1.{k}" for k in range(1, 41)),
        target_ports=ports,
        intensity=160.0,
    )
    return ScenarioSpec(duration_s=18000, benign_hosts=16, benign_rate=3.0, attacks=(attack,), seed=102)


def _mysql_spec() -> ScenarioSpec:
    targets = tuple(f"10.5.0.{k}" for k in range(1, 7))
    probes = (
        AttackSpec(
            attack_id="mysql-probe-a",
            attack_class=AttackClass.HORIZONTAL_SCAN,
            start_s=600,
            end_s=1680,
            source_ips=("203.0.113.21",),
            target_ips=targets,
            target_ports=(3306,),
            intensity=30.0,
        ),
        AttackSpec(
            attack_id="mysql-probe-b",
            attack_class=AttackClass.HORIZONTAL_SCAN,
            start_s=11400,
            end_s=12420,
            source_ips=("203.0.113.85",),
            target_ips=targets,
            target_ports=(3306,),
            intensity=30.0,
        ),
    )
    return ScenarioSpec(duration_s=14400, benign_hosts=14, benign_rate=3.0, attacks=probes, seed=103)


def _rotating_flood_spec() -> ScenarioSpec:
    ports = (80, 25, 443, 110)
    attacks = tuple(
        AttackSpec(
            attack_id=f"flood-{k}",
            attack_class=AttackClass.SYN_FLOOD,
            start_s=7200,
            end_s=10800,
            source_subnet="198.51.100",
            rotation_period_s=600,
            target_ips=(f"10.2.1.{k + 1}",),
            target_ports=(ports[k],),
            intensity=1500.0,
        )
        for k in range(4)
    )
    return ScenarioSpec(duration_s=18000, benign_hosts=16, benign_rate=3.0, attacks=attacks, seed=104)


def _periodic_smtp_spec() -> ScenarioSpec:
    attack = AttackSpec(
        attack_id="smtp-worm",
        attack_class=AttackClass.HORIZONTAL_SCAN,
        start_s=0,
        end_s=90000,
        source_ips=("198.51.100.77",),
        target_ips=tuple(f"10.6.0.{k}" for k in range(1, 121)),
        target_ports=(25,),
        intensity=160.0,
        burst_period_s=3600,
        burst_len_s=300,
        burst_jitter=0.125,
    )
    return ScenarioSpec(duration_s=90000, benign_hosts=6, benign_rate=2.0, attacks=(attack,), seed=105)


def _stealth_spec() -> ScenarioSpec:
    targets = tuple(f"10.4.0.{k}" for k in range(1, 31))
    attacks = tuple(
        AttackSpec(
            attack_id=f"stealth-{i}-{port}",
            attack_class=AttackClass.HORIZONTAL_SCAN,
            start_s=0,
            end_s=7200,
            source_ips=(f"192.0.2.{20 + i}",),
            target_ips=targets,
            target_ports=(port,),
            intensity=60.0,
        )
        for i in range(8)
        for port in (6129, 1433)
    )
    return ScenarioSpec(duration_s=18000, benign_hosts=16, benign_rate=3.0, attacks=attacks, seed=106)


def catalog() -> dict[str, ScenarioSpec]:
    """Named scenario presets, each deterministic under its default seed."""
    return {
        "worm-scan": _worm_scan_spec(),
        "block-scan": _block_scan_spec(),
        "mysql-3306": _mysql_spec(),
        "rotating-sip-flood": _rotating_flood_spec(),
        "periodic-smtp": _periodic_smtp_spec(),
        "stealth-6129-1433": _stealth_spec(),
    }


def preset(name: str, seed: int | None = None) -> ScenarioSpec:
    specs = catalog()
    if name not in specs:
        raise ScenarioError(
            f"unknown scenario {name!r}; available: " + ", ".join(sorted(specs))
        )
    spec = specs[name]
    return spec if seed is None else replace(spec, seed=seed)


def attack_to_dict(attack: AttackSpec) -> dict:
    return {
        "attack_id": attack.attack_id,
        "attack_class": attack.attack_class.value,
        "start_s": attack.start_s,
        "end_s": attack.end_s,
        "source_ips": list(attack.source_ips),
        "source_subnet": attack.source_subnet,
        "rotation_period_s": attack.rotation_period_s,
        "target_ips": list(attack.target_ips),
        "target_ports": list(attack.target_ports),
        "intensity": attack.intensity,
        "burst_period_s": attack.burst_period_s,
        "burst_len_s": attack.burst_len_s,
        "burst_jitter": attack.burst_jitter,
        "ramp": attack.ramp,
    }


def spec_to_dict(spec: ScenarioSpec) -> dict:
    return {
        "duration_s": spec.duration_s,
        "benign_hosts": spec.benign_hosts,
        "benign_rate": spec.benign_rate,
        "seed": spec.seed,
        "attacks": [attack_to_dict(a) for a in spec.attacks],
    }


def _attack_from_dict(data: dict) -> AttackSpec:
    try:
        return AttackSpec(
            attack_id=data["attack_id"],
            attack_class=AttackClass.parse(data["attack_class"]),
            start_s=int(data["start_s"]),
            end_s=int(data["end_s"]),
            source_ips=tuple(data.get("source_ips", ())),
            source_subnet=data.get("source_subnet"),
            rotation_period_s=data.get("rotation_period_s"),
            target_ips=tuple(data.get("target_ips", ())),
            target_ports=tuple(int(p) for p in data.get("target_ports", ())),
            intensity=float(data.get("intensity", 60.0)),
            burst_period_s=data.get("burst_period_s"),
            burst_len_s=int(data.get("burst_len_s", 300)),
            burst_jitter=float(data.get("burst_jitter", 0.125)),
            ramp=float(data.get("ramp", 0.0)),
        )
    except KeyError as exc:
        raise ScenarioError(f"attack spec missing field {exc.args[0]!r}") from None


def spec_from_dict(data: dict) -> ScenarioSpec:
    try:
        spec = ScenarioSpec(
            duration_s=int(data["duration_s"]),
            benign_hosts=int(data.get("benign_hosts", 0)),
            benign_rate=float(data.get("benign_rate", 0.0)),
            attacks=tuple(_attack_from_dict(a) for a in data.get("attacks", [])),
            seed=int(data.get("seed", 0)),
        )
    except KeyError as exc:
        raise ScenarioError(f"scenario spec missing field {exc.args[0]!r}") from None
    _validate(spec)
    return spec
