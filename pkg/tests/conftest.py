"""Shared fixtures: generated scenario data cached per session."""

from __future__ import annotations

import random

import pytest

from flowscope.model import FlowRecord
from flowscope.scenario import generate_scenario, preset


@pytest.fixture(scope="session")
def worm_data():
    return generate_scenario(preset("worm-scan"))


@pytest.fixture(scope="session")
def flood_data():
    return generate_scenario(preset("rotating-sip-flood"))


@pytest.fixture(scope="session")
def stealth_data():
    return generate_scenario(preset("stealth-6129-1433"))


@pytest.fixture(scope="session")
def smtp_data():
    return generate_scenario(preset("periodic-smtp"))


@pytest.fixture(scope="session")
def mysql_data():
    return generate_scenario(preset("mysql-3306"))


def random_records(
    rng: random.Random,
    n: int,
    t_max: int = 6000,
    hosts: int = 12,
    ports: tuple[int, ...] = (22, 80, 443, 3306),
) -> list[FlowRecord]:
    """Unlabeled random records for oracle-style tests."""
    records = []
    for _ in range(n):
        syn = rng.randint(0, 9)
        records.append(FlowRecord(
            ts=rng.randint(0, t_max - 1),
            sip=f"10.0.{rng.randint(0, 3)}.{rng.randint(1, hosts)}",
            dip=f"10.9.0.{rng.randint(1, hosts)}",
            sport=rng.randint(1024, 65535),
            dport=rng.choice(ports),
            syn=syn,
            synack=rng.randint(0, syn) if syn else 0,
        ))
    return records
