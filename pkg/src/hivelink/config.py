"""Server configuration: a YAML file listing hives, tokens, thresholds
and alert sinks, with env-var overrides for bind address and config path."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, time
from pathlib import Path
from zoneinfo import ZoneInfo

import yaml

from .dispatch import AlertSink
from .model import HiveConfig

ENV_BIND = "HIVELINK_BIND"
ENV_CONFIG = "HIVELINK_CONFIG"

DEFAULT_BIND = "127.0.0.1:8080"


@dataclass
class ServerConfig:
    data_dir: Path = Path("./data")
    display_timezone: str = "Asia/Kolkata"
    bind: str = DEFAULT_BIND
    operator_token: str = ""
    read_token: str = ""
    min_ingest_interval_s: float = 1.0
    detection_queue_capacity: int = 10000
    alert_queue_capacity: int = 1000
    fsync: bool = False
    hives: list[HiveConfig] = field(default_factory=list)

    @property
    def tz(self):
        return ZoneInfo(self.display_timezone)


def _parse_time(value) -> time:
    if isinstance(value, time):
        return value
    h, m = str(value).split(":")
    return time(int(h), int(m))


def _pair(value) -> tuple[float, float]:
    lo, hi = value
    return float(lo), float(hi)


def hive_config_from_dict(d: dict) -> HiveConfig:
    cfg = HiveConfig(hive_id=str(d["hive_id"]), api_token=str(d.get("api_token", "")))
    if "tare_tolerance_g" in d:
        cfg.tare_tolerance_g = float(d["tare_tolerance_g"])
    if d.get("ambient_temp_c") is not None:
        cfg.ambient_temp_c = float(d["ambient_temp_c"])
    if "temp_band" in d:
        cfg.temp_band = _pair(d["temp_band"])
    if "humidity_band" in d:
        cfg.humidity_band = _pair(d["humidity_band"])
    if "abscond_drop_g" in d:
        cfg.abscond_drop_g = _pair(d["abscond_drop_g"])
    if "abscond_window_min" in d:
        cfg.abscond_window_min = float(d["abscond_window_min"])
    if "theft_min_prior_g" in d:
        cfg.theft_min_prior_g = float(d["theft_min_prior_g"])
    if "fall_threshold_g" in d:
        cfg.fall_threshold_g = float(d["fall_threshold_g"])
    if "swarm_gain_g" in d:
        cfg.swarm_gain_g = float(d["swarm_gain_g"])
    if "swarm_days" in d:
        cfg.swarm_days = int(d["swarm_days"])
    if "flow_band_g_per_day" in d:
        cfg.flow_band_g_per_day = _pair(d["flow_band_g_per_day"])
    if "flow_min_g_per_day" in d:
        cfg.flow_min_g_per_day = float(d["flow_min_g_per_day"])
    if "super_capacity_g" in d:
        cfg.super_capacity_g = float(d["super_capacity_g"])
    if "refill_low_ml" in d:
        cfg.refill_low_ml = float(d["refill_low_ml"])
    if "gate_close_time" in d:
        cfg.gate_close_time = _parse_time(d["gate_close_time"])
    if "gate_open_time" in d:
        cfg.gate_open_time = _parse_time(d["gate_open_time"])
    if "health_sustain_min" in d:
        cfg.health_sustain_min = float(d["health_sustain_min"])
    if "smoothing_k" in d:
        cfg.smoothing_k = int(d["smoothing_k"])
    if d.get("registered_at") is not None:
        cfg.registered_at = datetime.fromisoformat(str(d["registered_at"]))
    for sink in d.get("alert_sinks", []):
        cfg.alert_sinks.append(
            AlertSink(
                kind=sink["kind"],
                url=sink.get("url", ""),
                event=sink.get("event", "hive_alert"),
                key=sink.get("key", ""),
                rate_limit_per_hour=int(sink.get("rate_limit_per_hour", 60)),
                enabled=bool(sink.get("enabled", True)),
            )
        )
    return cfg.validate()


def load_config(path: Path | str) -> ServerConfig:
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    cfg = ServerConfig()
    if "data_dir" in raw:
        cfg.data_dir = Path(raw["data_dir"])
    if "display_timezone" in raw:
        cfg.display_timezone = str(raw["display_timezone"])
    if "bind" in raw:
        cfg.bind = str(raw["bind"])
    cfg.operator_token = str(raw.get("operator_token", ""))
    cfg.read_token = str(raw.get("read_token", ""))
    if "min_ingest_interval_s" in raw:
        cfg.min_ingest_interval_s = float(raw["min_ingest_interval_s"])
    if "detection_queue_capacity" in raw:
        cfg.detection_queue_capacity = int(raw["detection_queue_capacity"])
    if "alert_queue_capacity" in raw:
        cfg.alert_queue_capacity = int(raw["alert_queue_capacity"])
    if "fsync" in raw:
        cfg.fsync = bool(raw["fsync"])
    for hive in raw.get("hives", []):
        cfg.hives.append(hive_config_from_dict(hive))
    cfg.tz  # fail fast on a bad timezone name
    if not cfg.hives:
        raise ValueError(f"{path}: config lists no hives")
    return cfg
