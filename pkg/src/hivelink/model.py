"""Domain types shared by every hivelink module: readings, per-hive
configuration, detected events, and the validation that guards them."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, time, timezone
from enum import Enum
from typing import Any, Mapping, Optional

TEMP_BOUNDS = (-20.0, 60.0)
HUMIDITY_BOUNDS = (0.0, 100.0)
SYRUP_BOUNDS = (0.0, 5000.0)
# Two 10 kg load cells bound the top; tare noise can go negative.
WEIGHT_BOUNDS = (-5000.0, 20000.0)


class ValidationError(Exception):
    """Base for reading validation failures; `field` names the offender."""

    def __init__(self, field_name: str, message: str):
        super().__init__(message)
        self.field = field_name


class MissingField(ValidationError):
    def __init__(self, field_name: str):
        super().__init__(field_name, f"missing field: {field_name}")


class OutOfRange(ValidationError):
    def __init__(self, field_name: str, value: float, bounds: tuple[float, float]):
        super().__init__(
            field_name,
            f"{field_name}={value!r} outside [{bounds[0]}, {bounds[1]}]",
        )
        self.value = value
        self.bounds = bounds


class BadValue(ValidationError):
    def __init__(self, field_name: str, raw: Any):
        super().__init__(field_name, f"{field_name}={raw!r} is not parseable")


class BadTimestamp(ValidationError):
    def __init__(self, message: str):
        super().__init__("timestamp", message)


class EventKind(str, Enum):
    HEALTH_ANOMALY = "HEALTH_ANOMALY"
    ABSCONDING = "ABSCONDING"
    SWARM_RISK = "SWARM_RISK"
    THEFT = "THEFT"
    FALL = "FALL"
    HONEY_FLOW = "HONEY_FLOW"
    REFILL_DUE = "REFILL_DUE"
    GATE_CHANGED = "GATE_CHANGED"
    LIGHT_ANOMALY = "LIGHT_ANOMALY"


class Severity(str, Enum):
    INFO = "INFO"
    WARNING = "WARNING"
    CRITICAL = "CRITICAL"


# Severity is a pure function of kind.
_SEVERITY_BY_KIND = {
    EventKind.THEFT: Severity.CRITICAL,
    EventKind.FALL: Severity.CRITICAL,
    EventKind.ABSCONDING: Severity.CRITICAL,
    EventKind.HEALTH_ANOMALY: Severity.WARNING,
    EventKind.REFILL_DUE: Severity.WARNING,
    EventKind.LIGHT_ANOMALY: Severity.WARNING,
    EventKind.SWARM_RISK: Severity.INFO,
    EventKind.HONEY_FLOW: Severity.INFO,
    EventKind.GATE_CHANGED: Severity.INFO,
}

# Detection-rule kinds, as opposed to gate/controller kinds.
DETECTION_KINDS = frozenset(
    {
        EventKind.HEALTH_ANOMALY,
        EventKind.ABSCONDING,
        EventKind.SWARM_RISK,
        EventKind.THEFT,
        EventKind.FALL,
        EventKind.HONEY_FLOW,
        EventKind.REFILL_DUE,
    }
)


def severity_for(kind: EventKind) -> Severity:
    return _SEVERITY_BY_KIND[kind]


@dataclass(frozen=True)
class SensorReading:
    """One timestamped sample of all five sensed quantities for a hive."""

    hive_id: str
    timestamp: datetime  # aware, stored in UTC
    temp_c: float
    humidity_pct: float
    syrup_ml: float
    weight_g: float
    light: bool

    def as_dict(self) -> dict[str, Any]:
        return {
            "hive_id": self.hive_id,
            "timestamp": self.timestamp.isoformat(),
            "temp_c": self.temp_c,
            "humidity_pct": self.humidity_pct,
            "syrup_ml": self.syrup_ml,
            "weight_g": self.weight_g,
            "light": self.light,
        }

    @staticmethod
    def from_dict(d: Mapping[str, Any]) -> "SensorReading":
        return SensorReading(
            hive_id=d["hive_id"],
            timestamp=datetime.fromisoformat(d["timestamp"]),
            temp_c=float(d["temp_c"]),
            humidity_pct=float(d["humidity_pct"]),
            syrup_ml=float(d["syrup_ml"]),
            weight_g=float(d["weight_g"]),
            light=bool(d["light"]),
        )


@dataclass
class HiveConfig:
    """Per-hive calibration, rule thresholds, schedule and alert routing.

    Kilogram-scale rules from the deployment notes are kept in grams here;
    every threshold is configurable because real hives vary.
    """

    hive_id: str = "hive"
    api_token: str = ""
    tare_tolerance_g: float = 200.0
    ambient_temp_c: Optional[float] = None
    temp_band: tuple[float, float] = (30.0, 32.0)
    humidity_band: tuple[float, float] = (50.0, 60.0)
    abscond_drop_g: tuple[float, float] = (800.0, 2500.0)
    abscond_window_min: float = 60.0
    theft_min_prior_g: float = 2000.0
    fall_threshold_g: float = -300.0
    swarm_gain_g: float = 1500.0
    swarm_days: int = 7
    flow_band_g_per_day: tuple[float, float] = (200.0, 300.0)
    flow_min_g_per_day: float = 150.0
    super_capacity_g: float = 4500.0
    refill_low_ml: float = 50.0
    gate_close_time: time = time(19, 0)
    gate_open_time: time = time(6, 0)
    health_sustain_min: float = 120.0
    smoothing_k: int = 5
    alert_sinks: list = field(default_factory=list)
    registered_at: Optional[datetime] = None

    def validate(self) -> "HiveConfig":
        """Raise ValueError on any inconsistent band or window setting."""
        for name in ("temp_band", "humidity_band", "abscond_drop_g", "flow_band_g_per_day"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name}: expected low < high, got ({lo}, {hi})")
        if self.smoothing_k < 1 or self.smoothing_k % 2 == 0:
            raise ValueError(f"smoothing_k must be odd and >= 1, got {self.smoothing_k}")
        if not self.gate_open_time < self.gate_close_time:
            raise ValueError(
                f"gate_open_time {self.gate_open_time} must precede "
                f"gate_close_time {self.gate_close_time} within one local day"
            )
        if self.abscond_window_min <= 0 or self.health_sustain_min <= 0:
            raise ValueError("detector windows must be positive")
        if self.swarm_days < 1:
            raise ValueError("swarm_days must be >= 1")
        return self


@dataclass(frozen=True)
class HiveEvent:
    """A detected condition with its numeric evidence.

    Evidence keys are fixed per kind:
      HEALTH_ANOMALY: mean_temp, mean_hum, minutes_out
      ABSCONDING:     drop_g, minutes, temp_after
      THEFT:          prior_g, after_g
      FALL:           weight_g
      SWARM_RISK:     gain_g, days
      HONEY_FLOW:     slope_g_per_day, accumulated_g [, eta_days_to_full]
      REFILL_DUE:     current_ml [, eta_hours]
      GATE_CHANGED:   open (1.0 or 0.0)
      LIGHT_ANOMALY:  minutes_dark
    """

    hive_id: str
    kind: EventKind
    window_start: datetime
    window_end: datetime
    detected_at: datetime
    evidence: Mapping[str, float] = field(default_factory=dict)

    @property
    def severity(self) -> Severity:
        return severity_for(self.kind)

    def __post_init__(self):
        if not (self.window_start <= self.window_end <= self.detected_at):
            raise ValueError(
                f"event window out of order: {self.window_start} .. "
                f"{self.window_end} detected {self.detected_at}"
            )

    def as_dict(self) -> dict[str, Any]:
        return {
            "hive_id": self.hive_id,
            "kind": self.kind.value,
            "severity": self.severity.value,
            "window_start": self.window_start.isoformat(),
            "window_end": self.window_end.isoformat(),
            "detected_at": self.detected_at.isoformat(),
            "evidence": dict(self.evidence),
        }

    @staticmethod
    def from_dict(d: Mapping[str, Any]) -> "HiveEvent":
        return HiveEvent(
            hive_id=d["hive_id"],
            kind=EventKind(d["kind"]),
            window_start=datetime.fromisoformat(d["window_start"]),
            window_end=datetime.fromisoformat(d["window_end"]),
            detected_at=datetime.fromisoformat(d["detected_at"]),
            evidence=dict(d["evidence"]),
        )


_RAW_FIELDS = ("temp", "hum", "syrup", "weight", "light")

_BOUNDS = {
    "temp": ("temp_c", TEMP_BOUNDS),
    "hum": ("humidity_pct", HUMIDITY_BOUNDS),
    "syrup": ("syrup_ml", SYRUP_BOUNDS),
    "weight": ("weight_g", WEIGHT_BOUNDS),
}


def _parse_number(name: str, typed_name: str, raw: Any) -> float:
    if raw is None:
        raise MissingField(typed_name)
    if isinstance(raw, bool):
        raise BadValue(typed_name, raw)
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise BadValue(typed_name, raw) from None
    if value != value or value in (float("inf"), float("-inf")):
        raise BadValue(typed_name, raw)
    return value


def _parse_light(raw: Any) -> bool:
    if raw is None:
        raise MissingField("light")
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise BadValue("light", raw)


def validate_reading(
    raw: Mapping[str, Any],
    cfg: HiveConfig,
    timestamp: datetime,
) -> SensorReading:
    """Turn raw text fields into a typed reading or raise naming the bad field.

    `raw` carries the wire field names (temp, hum, syrup, weight, light);
    values may be text or numbers.  Validation is total: any input either
    yields a reading satisfying all invariants or a ValidationError.
    """
    if timestamp.tzinfo is None:
        raise BadTimestamp("timestamp must be timezone-aware")
    ts = timestamp.astimezone(timezone.utc)
    if cfg.registered_at is not None and ts < cfg.registered_at.astimezone(timezone.utc):
        raise BadTimestamp(f"timestamp {ts.isoformat()} precedes hive registration")

    values = {}
    for wire_name in ("temp", "hum", "syrup", "weight"):
        typed_name, bounds = _BOUNDS[wire_name]
        value = _parse_number(wire_name, typed_name, raw.get(wire_name))
        if not bounds[0] <= value <= bounds[1]:
            raise OutOfRange(typed_name, value, bounds)
        values[typed_name] = value

    light = _parse_light(raw.get("light"))

    return SensorReading(
        hive_id=cfg.hive_id,
        timestamp=ts,
        temp_c=values["temp_c"],
        humidity_pct=values["humidity_pct"],
        syrup_ml=values["syrup_ml"],
        weight_g=values["weight_g"],
        light=light,
    )


def raw_field_names() -> tuple[str, ...]:
    """The five wire field names a device must send."""
    return _RAW_FIELDS
