from __future__ import annotations

import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path
from zoneinfo import ZoneInfo

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hivelink.model import HiveConfig, SensorReading


@pytest.fixture
def tz():
    return ZoneInfo("Asia/Kolkata")


@pytest.fixture
def cfg():
    return HiveConfig(hive_id="H1", api_token="devtok").validate()


def mk_reading(
    ts: datetime,
    weight: float,
    temp: float = 31.0,
    hum: float = 55.0,
    syrup: float = 500.0,
    light: bool = True,
    hive_id: str = "H1",
) -> SensorReading:
    return SensorReading(
        hive_id=hive_id,
        timestamp=ts.astimezone(timezone.utc),
        temp_c=temp,
        humidity_pct=hum,
        syrup_ml=syrup,
        weight_g=weight,
        light=light,
    )


def series(
    start: datetime,
    interval_s: float,
    weights,
    temps=None,
    hums=None,
    syrups=None,
    hive_id: str = "H1",
) -> list[SensorReading]:
    """Build a reading sequence from per-channel value lists."""
    n = len(weights)
    temps = temps if temps is not None else [31.0] * n
    hums = hums if hums is not None else [55.0] * n
    syrups = syrups if syrups is not None else [500.0] * n
    out = []
    for i in range(n):
        ts = start + timedelta(seconds=i * interval_s)
        out.append(
            mk_reading(ts, weights[i], temps[i], hums[i], syrups[i], hive_id=hive_id)
        )
    return out
