"""Seeded adversarial trace generator for engine/oracle equivalence.

Traces are piecewise-regime random walks that deliberately dwell near
detector boundaries: drops of every magnitude, zero visits, negative
plateaus, band exits, syrup declines and refills, multi-day spans that
produce nightly baselines.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from hivelink.model import HiveConfig, SensorReading

TZ_FIXED = timezone(timedelta(hours=5, minutes=30))

WEIGHT_TARGETS = (9000.0, 8000.0, 6500.0, 4000.0, 2300.0, 500.0, 150.0, 0.0, -250.0, -400.0, -2000.0)
TEMP_TARGETS = (31.0, 30.1, 29.4, 34.0, 25.5, 26.8, 24.0)
HUM_TARGETS = (55.0, 50.5, 49.0, 45.0, 62.0)


def fuzz_config(rng: random.Random) -> HiveConfig:
    cfg = HiveConfig(hive_id="F1", api_token="t")
    if rng.random() < 0.5:
        cfg.ambient_temp_c = 25.5
    if rng.random() < 0.3:
        cfg.health_sustain_min = rng.choice([30.0, 60.0, 120.0])
    if rng.random() < 0.3:
        cfg.abscond_window_min = rng.choice([30.0, 60.0, 90.0])
    return cfg.validate()


def fuzz_trace(seed: int, max_len: int = 2000) -> tuple[list[SensorReading], HiveConfig]:
    rng = random.Random(seed)
    cfg = fuzz_config(rng)

    n_pick = rng.random()
    if n_pick < 0.70:
        n = rng.randint(20, 200)
        interval = rng.choice([60.0, 300.0, 600.0, 900.0])
    elif n_pick < 0.92:
        n = rng.randint(200, 700)
        interval = rng.choice([300.0, 600.0, 900.0])
    else:
        # multi-day traces: enough span for baselines, flow and swarm
        n = rng.randint(800, max_len)
        interval = 900.0
    start = datetime(2023, 5, 1, tzinfo=TZ_FIXED) + timedelta(
        minutes=rng.randint(0, 3 * 1440)
    )

    weight = rng.choice([9000.0, 8000.0, 300.0])
    temp = 31.0
    hum = 55.0
    syrup = rng.choice([500.0, 300.0])
    w_target, t_target, h_target = weight, temp, hum
    w_rate = 0.0  # g per reading while moving to target
    w_drift = 0.0  # slow stores trend, g per reading
    syrup_rate = 0.0  # mL per hour
    if n * interval > 8 * 86400.0 and rng.random() < 0.6:
        w_drift = rng.choice([120.0, 230.0, 400.0]) * interval / 86400.0

    readings = []
    for i in range(n):
        if rng.random() < 0.04:
            w_target = rng.choice(WEIGHT_TARGETS)
            if rng.random() < 0.5:
                weight = w_target  # step change
                w_rate = 0.0
            else:
                steps = max(1, rng.randint(1, 40))
                w_rate = (w_target - weight) / steps
        if rng.random() < 0.03:
            t_target = rng.choice(TEMP_TARGETS)
            if rng.random() < 0.5:
                temp = t_target
        if rng.random() < 0.03:
            h_target = rng.choice(HUM_TARGETS)
            if rng.random() < 0.5:
                hum = h_target
        if rng.random() < 0.02:
            syrup = rng.choice([540.0, 500.0, 120.0, 45.0, 20.0])
            syrup_rate = rng.choice([0.0, -2.0, -8.0, -30.0, -120.0])

        if w_rate and abs(weight - w_target) > abs(w_rate):
            weight += w_rate
        else:
            weight += (w_target - weight) * 0.5
        weight += w_drift
        w_target += w_drift
        temp += (t_target - temp) * 0.3
        hum += (h_target - hum) * 0.3
        syrup = max(0.0, syrup + syrup_rate * interval / 3600.0)

        ts = start + timedelta(seconds=i * interval)
        local_hour = ts.astimezone(TZ_FIXED).hour
        readings.append(
            SensorReading(
                hive_id="F1",
                timestamp=ts,
                temp_c=min(60.0, max(-20.0, temp + rng.gauss(0, 0.2))),
                humidity_pct=min(100.0, max(0.0, hum + rng.gauss(0, 1.0))),
                syrup_ml=min(5000.0, max(0.0, syrup)),
                weight_g=min(20000.0, max(-5000.0, weight + rng.gauss(0, 5.0))),
                light=6 <= local_hour < 19,
            )
        )
    return readings, cfg
