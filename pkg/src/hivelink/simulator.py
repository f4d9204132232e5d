"""Scenario-driven synthetic hive: generates physically plausible sensor
traces for every detectable phenomenon and replays them against the
ingest API or to a canonical CSV file.

Generation is a pure function of (scenario, seed).  Physics: the brood
stays thermoregulated in-band, daytime foraging dips the weight with a
half-sine between 08:00 and 18:00, light follows a 06:00-19:00 solar
schedule, and each scripted episode perturbs exactly the channels the
real phenomenon would.  After a theft only the weight channel collapses
to zero: the load platform sits under the hive box while the sensor
module stays at the station.
"""

from __future__ import annotations

import configparser
import math
import random
import time as time_mod
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Optional

import httpx

from .model import EventKind, HiveConfig, SensorReading
from .store import CSV_HEADER, format_row

DROP_RAMP_S = 30 * 60.0  # absconding departure spread over 30 min
THERMAL_TAU_S = 2 * 3600.0  # relaxation toward ambient once the colony left
FORAGER_DIP_G = 300.0  # midday half-sine amplitude
SUNRISE_H = 6.0
SUNSET_H = 19.0
AMBIENT_HUM_PCT = 40.0
FALL_WEIGHT_G = -2000.0

EPISODE_KINDS = (
    "NORMAL",
    "ABSCOND",
    "SWARM_BUILDUP",
    "THEFT",
    "FALL",
    "HONEY_FLOW",
    "FEED",
    "SENSOR_FAULT",
)


class InvalidScenario(ValueError):
    pass


@dataclass
class Episode:
    at_h: float  # offset from scenario start, hours
    kind: str
    drop_g: float = 0.0
    gain_g_per_day: float = 0.0
    days: float = 0.0
    refill_ml: float = 0.0
    consumption_ml_per_hour: float = 0.0
    fault_field: str = ""
    fault_mode: str = ""  # stuck | zero | dark

    def __post_init__(self):
        if self.kind not in EPISODE_KINDS:
            raise InvalidScenario(f"unknown episode kind: {self.kind!r}")


@dataclass
class Scenario:
    seed: int = 0
    start: datetime = None  # aware; its tzinfo defines hive-local time
    duration_h: float = 24.0
    interval_s: float = 60.0
    colony_weight_g: float = 1500.0
    stores_weight_g: float = 6500.0
    syrup_ml: float = 500.0
    brood_temp_c: float = 31.0
    brood_hum_pct: float = 55.0
    ambient_mean_c: float = 25.5
    ambient_amplitude_c: float = 1.0
    ambient_phase_h: float = 14.0  # local hour of the daily temperature peak
    weight_sigma_g: float = 5.0
    temp_sigma_c: float = 0.2
    hum_sigma_pct: float = 1.0
    episodes: list[Episode] = field(default_factory=list)

    def validate(self) -> "Scenario":
        if self.start is None or self.start.tzinfo is None:
            raise InvalidScenario("scenario start must be an aware datetime")
        if self.interval_s < 1.0:
            raise InvalidScenario("reading interval must be >= 1 s")
        if self.duration_h <= 0:
            raise InvalidScenario("duration must be positive")
        last = -1.0
        for ep in self.episodes:
            if ep.at_h <= last:
                raise InvalidScenario("episodes must have strictly increasing offsets")
            last = ep.at_h
        ramp_end = -1.0
        for ep in self.episodes:
            if ep.kind in ("SWARM_BUILDUP", "HONEY_FLOW"):
                if ep.at_h < ramp_end:
                    raise InvalidScenario("weight ramps overlap in time")
                ramp_end = ep.at_h + ep.days * 24.0
        return self


@dataclass
class Annotation:
    start: datetime
    end: datetime
    kind: str
    episode: Optional[Episode]


@dataclass
class Trace:
    hive_id: str
    readings: list[SensorReading]
    annotations: list[Annotation]


@dataclass
class ReplayStats:
    sent: int = 0
    accepted: int = 0
    rejected: int = 0
    duration_s: float = 0.0
    commands: list = field(default_factory=list)


def generate(scenario: Scenario, hive_id: str = "hive") -> Trace:
    """Deterministic trace for a scenario; same (scenario, seed) twice
    yields identical readings."""
    scenario.validate()
    rng = random.Random(scenario.seed)
    tz = scenario.start.tzinfo
    start_epoch = scenario.start.timestamp()
    n = int(scenario.duration_h * 3600.0 / scenario.interval_s)

    abscond_at: Optional[float] = None
    abscond_drop = 0.0
    theft_at: Optional[float] = None
    fall_at: Optional[float] = None
    ramps: list[tuple[float, float, float]] = []  # (start_s, end_s, g_per_day)
    feeds: list[tuple[float, float, float]] = []  # (start_s, level_ml, ml_per_hour)
    faults: list[tuple[float, str, str]] = []  # (start_s, field, mode)

    for ep in scenario.episodes:
        at_s = ep.at_h * 3600.0
        if ep.kind == "ABSCOND":
            abscond_at, abscond_drop = at_s, ep.drop_g
        elif ep.kind == "THEFT":
            theft_at = at_s
        elif ep.kind == "FALL":
            fall_at = at_s
        elif ep.kind in ("SWARM_BUILDUP", "HONEY_FLOW"):
            ramps.append((at_s, at_s + ep.days * 86400.0, ep.gain_g_per_day))
        elif ep.kind == "FEED":
            feeds.append((at_s, ep.refill_ml, ep.consumption_ml_per_hour))
        elif ep.kind == "SENSOR_FAULT":
            faults.append((at_s, ep.fault_field, ep.fault_mode))

    readings = []
    stuck: dict[str, float | bool] = {}
    for i in range(n):
        offset = i * scenario.interval_s
        epoch = start_epoch + offset
        local = datetime.fromtimestamp(epoch, tz=tz)
        hour = local.hour + local.minute / 60.0 + local.second / 3600.0

        ambient = scenario.ambient_mean_c + scenario.ambient_amplitude_c * math.sin(
            2.0 * math.pi * (hour - scenario.ambient_phase_h + 6.0) / 24.0
        )

        stores = scenario.stores_weight_g
        for r_start, r_end, rate in ramps:
            if offset > r_start:
                stores += rate * (min(offset, r_end) - r_start) / 86400.0

        departed = 0.0
        colony_gone_at: Optional[float] = None
        if abscond_at is not None and offset >= abscond_at:
            departed = abscond_drop * min(1.0, (offset - abscond_at) / DROP_RAMP_S)
            colony_gone_at = abscond_at
        if theft_at is not None and offset >= theft_at:
            colony_gone_at = theft_at if colony_gone_at is None else colony_gone_at

        bees_home = colony_gone_at is None and not (
            fall_at is not None and offset >= fall_at
        )

        weight = scenario.colony_weight_g + stores - departed
        if bees_home and 8.0 <= hour <= 18.0:
            weight -= FORAGER_DIP_G * math.sin(math.pi * (hour - 8.0) / 10.0)
        if theft_at is not None and offset >= theft_at:
            weight = 0.0
        if fall_at is not None and offset >= fall_at:
            weight = FALL_WEIGHT_G

        if colony_gone_at is not None:
            decay = math.exp(-(offset - colony_gone_at) / THERMAL_TAU_S)
            temp = ambient + (scenario.brood_temp_c - ambient) * decay
            hum = AMBIENT_HUM_PCT + (scenario.brood_hum_pct - AMBIENT_HUM_PCT) * decay
        else:
            temp = scenario.brood_temp_c
            hum = scenario.brood_hum_pct

        syrup = scenario.syrup_ml
        for f_start, level, rate in feeds:
            if offset >= f_start:
                syrup = max(0.0, level - rate * (offset - f_start) / 3600.0)

        light = SUNRISE_H <= hour < SUNSET_H

        weight += rng.gauss(0.0, scenario.weight_sigma_g)
        temp += rng.gauss(0.0, scenario.temp_sigma_c)
        hum += rng.gauss(0.0, scenario.hum_sigma_pct)

        values: dict[str, float | bool] = {
            "weight": weight,
            "temp": temp,
            "hum": hum,
            "syrup": syrup,
            "light": light,
        }
        for f_start, fault_field, mode in faults:
            if offset < f_start:
                continue
            if mode == "stuck":
                stuck.setdefault(fault_field, values[fault_field])
                values[fault_field] = stuck[fault_field]
            elif mode == "zero":
                values[fault_field] = 0.0
            elif mode == "dark" and fault_field == "light":
                values[fault_field] = False

        readings.append(
            SensorReading(
                hive_id=hive_id,
                timestamp=datetime.fromtimestamp(epoch, tz=tz),
                temp_c=min(60.0, max(-20.0, values["temp"])),
                humidity_pct=min(100.0, max(0.0, values["hum"])),
                syrup_ml=min(5000.0, max(0.0, values["syrup"])),
                weight_g=min(20000.0, max(-5000.0, values["weight"])),
                light=bool(values["light"]),
            )
        )

    annotations = _annotate(scenario, tz)
    return Trace(hive_id, readings, annotations)


def _annotate(scenario: Scenario, tz) -> list[Annotation]:
    """Partition the trace into per-episode segments; the leading segment
    (before the first episode) is NORMAL."""
    start = scenario.start
    end = start + timedelta(hours=scenario.duration_h)
    if not scenario.episodes:
        return [Annotation(start, end, "NORMAL", None)]
    annotations = []
    first_at = start + timedelta(hours=scenario.episodes[0].at_h)
    if first_at > start:
        annotations.append(Annotation(start, first_at, "NORMAL", None))
    for idx, ep in enumerate(scenario.episodes):
        seg_start = start + timedelta(hours=ep.at_h)
        if idx + 1 < len(scenario.episodes):
            seg_end = start + timedelta(hours=scenario.episodes[idx + 1].at_h)
        else:
            seg_end = end
        annotations.append(Annotation(seg_start, seg_end, ep.kind, ep))
    return annotations


def expected_event_kinds(annotation: Annotation, cfg: HiveConfig) -> set[EventKind]:
    """Ground-truth detector kinds one scripted episode should produce
    under the given config.

    Weight-trend rules overlap by construction: any sustained gain at or
    above the swarm threshold is also a honey-flow signal, so buildup
    episodes annotate both kinds.
    """
    ep = annotation.episode
    if ep is None or ep.kind == "NORMAL":
        return set()
    if ep.kind == "ABSCOND":
        lo, hi = cfg.abscond_drop_g
        return {EventKind.ABSCONDING} if lo <= ep.drop_g <= hi else set()
    if ep.kind == "THEFT":
        return {EventKind.THEFT}
    if ep.kind == "FALL":
        return {EventKind.FALL} if FALL_WEIGHT_G < cfg.fall_threshold_g else set()
    if ep.kind in ("SWARM_BUILDUP", "HONEY_FLOW"):
        kinds = set()
        if ep.gain_g_per_day >= cfg.flow_min_g_per_day:
            kinds.add(EventKind.HONEY_FLOW)
        if (
            ep.days >= cfg.swarm_days
            and ep.gain_g_per_day * cfg.swarm_days >= cfg.swarm_gain_g
        ):
            kinds.add(EventKind.SWARM_RISK)
        return kinds
    if ep.kind == "FEED":
        if ep.consumption_ml_per_hour <= 0:
            return set()
        hours_to_trigger = max(
            2.0, ep.refill_ml / ep.consumption_ml_per_hour - 24.0
        )
        seg_hours = (annotation.end - annotation.start).total_seconds() / 3600.0
        return {EventKind.REFILL_DUE} if seg_hours > hours_to_trigger else set()
    if ep.kind == "SENSOR_FAULT":
        if ep.fault_field == "light" and ep.fault_mode in ("dark", "zero", "stuck"):
            return {EventKind.LIGHT_ANOMALY}
        return set()
    return set()


# -- scenario files -----------------------------------------------------


def load_scenario(path: Path | str) -> Scenario:
    """Parse the INI-style scenario format (see docs in README)."""
    parser = configparser.ConfigParser()
    read = parser.read(str(path))
    if not read:
        raise InvalidScenario(f"cannot read scenario file: {path}")
    if "scenario" not in parser:
        raise InvalidScenario("missing [scenario] section")

    sc = parser["scenario"]
    scenario = Scenario(
        seed=sc.getint("seed", 0),
        start=datetime.fromisoformat(sc.get("start")),
        duration_h=sc.getfloat("duration_h", 24.0),
        interval_s=sc.getfloat("interval_s", 60.0),
    )
    if "baseline" in parser:
        b = parser["baseline"]
        scenario.colony_weight_g = b.getfloat("colony_weight_g", scenario.colony_weight_g)
        scenario.stores_weight_g = b.getfloat("stores_weight_g", scenario.stores_weight_g)
        scenario.syrup_ml = b.getfloat("syrup_ml", scenario.syrup_ml)
        scenario.brood_temp_c = b.getfloat("brood_temp_c", scenario.brood_temp_c)
        scenario.brood_hum_pct = b.getfloat("brood_hum_pct", scenario.brood_hum_pct)
        scenario.ambient_mean_c = b.getfloat("ambient_mean_c", scenario.ambient_mean_c)
        scenario.ambient_amplitude_c = b.getfloat(
            "ambient_amplitude_c", scenario.ambient_amplitude_c
        )
        scenario.ambient_phase_h = b.getfloat("ambient_phase_h", scenario.ambient_phase_h)
    if "noise" in parser:
        nz = parser["noise"]
        scenario.weight_sigma_g = nz.getfloat("weight_sigma_g", scenario.weight_sigma_g)
        scenario.temp_sigma_c = nz.getfloat("temp_sigma_c", scenario.temp_sigma_c)
        scenario.hum_sigma_pct = nz.getfloat("hum_sigma_pct", scenario.hum_sigma_pct)

    for section in parser.sections():
        if not section.startswith("episode:"):
            continue
        e = parser[section]
        scenario.episodes.append(
            Episode(
                at_h=e.getfloat("at_h"),
                kind=e.get("kind", "NORMAL").upper(),
                drop_g=e.getfloat("drop_g", 0.0),
                gain_g_per_day=e.getfloat("gain_g_per_day", 0.0),
                days=e.getfloat("days", 0.0),
                refill_ml=e.getfloat("refill_ml", 0.0),
                consumption_ml_per_hour=e.getfloat("consumption_ml_per_hour", 0.0),
                fault_field=e.get("field", ""),
                fault_mode=e.get("mode", ""),
            )
        )
    scenario.episodes.sort(key=lambda ep: ep.at_h)
    return scenario.validate()


# -- replay ---------------------------------------------------------------


def replay_to_csv(trace: Trace, path: Path | str, tz=None) -> ReplayStats:
    """Write the trace as a canonical CSV file (round-trips through the
    store import bit-exactly at minute resolution)."""
    tz = tz or trace.readings[0].timestamp.tzinfo if trace.readings else tz
    lines = [CSV_HEADER]
    lines.extend(format_row(r, tz) for r in trace.readings)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return ReplayStats(sent=len(trace.readings), accepted=len(trace.readings))


def replay_http(
    trace: Trace,
    base_url: str,
    token: str,
    speed: float = 1.0,
    interval_s: float = 60.0,
    poll_commands_every: int = 10,
    sleep=time_mod.sleep,
) -> ReplayStats:
    """Push each reading to a live server in order, honoring the reading
    interval divided by the speed multiplier; polls the command endpoint
    to close the gate-control loop.

    A reading is retried 3 times on transport errors, then skipped and
    counted as rejected.
    """
    stats = ReplayStats()
    started = time_mod.monotonic()
    pause = interval_s / speed if speed > 0 else 0.0
    with httpx.Client(timeout=10.0) as client:
        for idx, reading in enumerate(trace.readings):
            if idx > 0 and pause > 0:
                sleep(pause)
            params = {
                "hive": reading.hive_id,
                "temp": repr(reading.temp_c),
                "hum": repr(reading.humidity_pct),
                "syrup": repr(reading.syrup_ml),
                "weight": repr(reading.weight_g),
                "light": "1" if reading.light else "0",
                "token": token,
            }
            stats.sent += 1
            delivered = False
            for _attempt in range(3):
                try:
                    resp = client.get(f"{base_url.rstrip('/')}/ingest", params=params)
                except httpx.TransportError:
                    continue
                delivered = resp.status_code == 200 and resp.text == "OK"
                break
            if delivered:
                stats.accepted += 1
            else:
                stats.rejected += 1
            if poll_commands_every and stats.sent % poll_commands_every == 0:
                try:
                    resp = client.get(
                        f"{base_url.rstrip('/')}/hives/{trace.hive_id}/commands",
                        params={"token": token},
                    )
                    if resp.status_code == 200:
                        stats.commands.extend(resp.json().get("commands", []))
                except httpx.TransportError:
                    pass
    stats.duration_s = time_mod.monotonic() - started
    return stats
