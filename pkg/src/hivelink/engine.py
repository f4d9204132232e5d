"""Streaming rule engine: evaluates every detection rule over a hive's
reading sequence, emitting each event exactly once per episode.

Detectors never read the wall clock; all time comes from reading
timestamps, so a fixed input sequence always yields a fixed event
sequence.  The exact per-step contract (mirrored by the whole-trace
test oracle) is:

 1. Condition the reading: each numeric channel becomes the trailing
    median of the last k raw values (largest odd window <= min(k, n)).
 2. Maintain the drop window: smoothed weights within the last
    abscond_window_min minutes (inclusive).  drop_delta = window max
    minus current; the drop start is the EARLIEST reading achieving
    the max.
 3. Release the collapse block if its owner's episode ended:
    FALL when weight >= fall_threshold_g, THEFT when weight >=
    theft_min_prior_g, ABSCONDING when drop_delta < abscond_drop min.
 4. Track the temperature out-of-band run (used by absconding's
    band-exit fallback).
 5. Weight detectors, skipped entirely while the block is held
    (counters reset, absconding disarmed):
      FALL   - fires at the 3rd consecutive smoothed weight below
               fall_threshold_g.
      THEFT  - fires when the smoothed weight is within the tare band
               and any of the previous 3 smoothed weights was >=
               theft_min_prior_g.
      ABSCONDING - arms when drop_delta is inside abscond_drop_g and the
               weight is above the tare band; while armed the observed
               drop peak keeps growing; disarms on tare-band entry,
               fall-zone entry, or 6 h expiry; fires when the smoothed
               temperature comes within 1.5 degC of the configured
               ambient, or (no ambient) has been out of temp_band for
               >= 60 min.
    Whichever fires first sets the block; at most one of the three fires
    for one weight-collapse episode.
 6. Health anomaly: fires when the smoothed temperature or humidity is
    out of band continuously for >= health_sustain_min minutes; re-arms
    after 60 min continuously back in band.  Suppressed (runs reset)
    while a collapse block is held or absconding is armed: a collapsed
    or abandoned hive is expected to read ambient.
 7. Nightly baselines: readings with local hour 23 or 0 belong to the
    window spanning the next midnight; the window for date D finalizes
    at the first reading at/after 01:00 local of D, producing the median
    smoothed weight when >= 3 samples exist.  Each finalized baseline
    triggers the swarm check then the honey-flow estimate.
 8. Supplement forecast: least-squares slope over the smoothed syrup
    levels of the last 6 h, evaluated once the window spans >= 2 h.
    REFILL_DUE fires when the level is below refill_low_ml or the
    projected hours-to-empty drop below 24; re-arms once the level has
    risen >= 100 mL above its post-fire minimum.

Events within one step are emitted in the order: weight event, health,
then per finalized baseline date (ascending) swarm then flow, then
refill.
"""

from __future__ import annotations

import statistics
from collections import deque
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone, tzinfo
from enum import Enum
from typing import Optional

from .model import EventKind, HiveConfig, HiveEvent, SensorReading
from .signal import linear_fit

ABSCOND_ARM_EXPIRY_S = 6 * 3600.0
ABSCOND_AMBIENT_DELTA_C = 1.5
ABSCOND_BAND_EXIT_S = 3600.0
FALL_PERSIST_READINGS = 3
THEFT_LOOKBACK_READINGS = 3
HEALTH_REARM_S = 3600.0
SWARM_REFIRE_DAYS = 14
FLOW_FIT_BASELINES = 5
FLOW_MIN_BASELINES = 3
REFILL_WINDOW_S = 6 * 3600.0
REFILL_MIN_SPAN_S = 2 * 3600.0
REFILL_ETA_FIRE_H = 24.0
REFILL_REARM_ML = 100.0
BASELINE_MIN_SAMPLES = 3

SNAPSHOT_VERSION = 1


class OutOfOrderReading(Exception):
    pass


class FlowClass(str, Enum):
    NO_FLOW = "NO_FLOW"
    ACTIVE_FLOW = "ACTIVE_FLOW"
    IDEAL_FLOW = "IDEAL_FLOW"


@dataclass(frozen=True)
class HoneyFlowEstimate:
    slope_g_per_day: float
    classification: FlowClass
    accumulated_g: float
    eta_days_to_full: Optional[float]

    def as_dict(self) -> dict:
        return {
            "slope_g_per_day": self.slope_g_per_day,
            "classification": self.classification.value,
            "accumulated_g": self.accumulated_g,
            "eta_days_to_full": self.eta_days_to_full,
        }


@dataclass(frozen=True)
class RefillForecast:
    current_ml: float
    slope_ml_per_hour: float
    eta_hours_to_empty: Optional[float]

    def as_dict(self) -> dict:
        return {
            "current_ml": self.current_ml,
            "slope_ml_per_hour": self.slope_ml_per_hour,
            "eta_hours_to_empty": self.eta_hours_to_empty,
        }


def classify_flow(slope_g_per_day: float, cfg: HiveConfig) -> FlowClass:
    lo, hi = cfg.flow_band_g_per_day
    if lo <= slope_g_per_day <= hi:
        return FlowClass.IDEAL_FLOW
    if slope_g_per_day >= cfg.flow_min_g_per_day:
        return FlowClass.ACTIVE_FLOW
    return FlowClass.NO_FLOW


def _utc(epoch: float) -> datetime:
    return datetime.fromtimestamp(epoch, tz=timezone.utc)


class DetectionEngine:
    """Incremental evaluator for one hive; step() per reading in order."""

    def __init__(self, cfg: HiveConfig, tz: tzinfo):
        self.cfg = cfg
        self.tz = tz
        k = cfg.smoothing_k
        self._raw_w: deque[float] = deque(maxlen=k)
        self._raw_t: deque[float] = deque(maxlen=k)
        self._raw_h: deque[float] = deque(maxlen=k)
        self._raw_s: deque[float] = deque(maxlen=k)
        self._count = 0
        self._last_epoch: Optional[float] = None
        self.out_of_order = 0

        # weight-collapse machinery
        self._drop_window: deque[tuple[float, float]] = deque()  # (epoch, sw)
        self._recent_sw: deque[tuple[float, float]] = deque(maxlen=THEFT_LOOKBACK_READINGS)
        self._fall_count = 0
        self._fall_run_start: Optional[float] = None
        self._block: Optional[EventKind] = None
        self._armed = False
        self._arm_epoch = 0.0
        self._drop_peak = 0.0
        self._drop_start = 0.0
        self._drop_end = 0.0
        self._temp_out_start: Optional[float] = None

        # health anomaly
        self._health_out_start: Optional[float] = None
        self._health_in_start: Optional[float] = None
        self._health_fired = False
        self._health_sum_t = 0.0
        self._health_sum_h = 0.0
        self._health_n = 0

        # nightly baselines -> swarm / flow
        self._night_samples: dict[date, list[tuple[float, float]]] = {}
        self._baseline_cursor: Optional[date] = None
        self._baselines: dict[date, tuple[float, float]] = {}  # date -> (weight, last_epoch)
        self._baseline_dates: list[date] = []
        self._last_swarm_date: Optional[date] = None
        self._flow_class: Optional[FlowClass] = None
        self._flow_anchor: Optional[float] = None
        self.flow_estimate: Optional[HoneyFlowEstimate] = None

        # supplement forecast
        self._syrup_window: deque[tuple[float, float]] = deque()  # (epoch, ss)
        self._refill_fired = False
        self._refill_min_level = 0.0
        self.refill_forecast: Optional[RefillForecast] = None

    # -- conditioning ------------------------------------------------

    @staticmethod
    def _median(buf) -> float:
        n = len(buf)
        if n % 2 == 0:
            n -= 1
        window = sorted(list(buf)[len(buf) - n :])
        return window[n // 2]

    # -- main entry ---------------------------------------------------

    def step(self, reading: SensorReading) -> list[HiveEvent]:
        """Consume one reading, return the events it triggers."""
        epoch = reading.timestamp.timestamp()
        if self._last_epoch is not None and epoch < self._last_epoch:
            self.out_of_order += 1
            raise OutOfOrderReading(
                f"{reading.hive_id}: reading at {reading.timestamp} precedes engine clock"
            )
        self._last_epoch = epoch
        self._count += 1
        cfg = self.cfg

        self._raw_w.append(reading.weight_g)
        self._raw_t.append(reading.temp_c)
        self._raw_h.append(reading.humidity_pct)
        self._raw_s.append(reading.syrup_ml)
        sw = self._median(self._raw_w)
        st = self._median(self._raw_t)
        sh = self._median(self._raw_h)
        ss = self._median(self._raw_s)

        events: list[HiveEvent] = []
        detected_at = reading.timestamp

        # 2. drop window and drop_delta (earliest max wins ties)
        window_cutoff = epoch - cfg.abscond_window_min * 60.0
        dw = self._drop_window
        while dw and dw[0][0] < window_cutoff:
            dw.popleft()
        while dw and dw[-1][1] < sw:
            dw.pop()
        dw.append((epoch, sw))
        drop_start_epoch, window_max = dw[0]
        drop_delta = window_max - sw

        # 3. release the collapse block when its episode ends
        if self._block is EventKind.FALL and sw >= cfg.fall_threshold_g:
            self._block = None
        elif self._block is EventKind.THEFT and sw >= cfg.theft_min_prior_g:
            self._block = None
        elif self._block is EventKind.ABSCONDING and drop_delta < cfg.abscond_drop_g[0]:
            self._block = None

        # 4. temperature out-of-band run (absconding fallback)
        if st < cfg.temp_band[0] or st > cfg.temp_band[1]:
            if self._temp_out_start is None:
                self._temp_out_start = epoch
        else:
            self._temp_out_start = None

        # 5. weight detectors
        if self._block is not None:
            self._fall_count = 0
            self._fall_run_start = None
            self._armed = False
        else:
            fired = self._step_weight(reading, epoch, sw, st, drop_delta, drop_start_epoch)
            if fired is not None:
                events.append(fired)

        # 6. health anomaly
        health = self._step_health(reading, epoch, st, sh)
        if health is not None:
            events.append(health)

        # 7. nightly baselines -> swarm / flow
        events.extend(self._step_baselines(reading, epoch, sw))

        # 8. supplement forecast
        refill = self._step_refill(reading, epoch, ss)
        if refill is not None:
            events.append(refill)

        self._recent_sw.append((epoch, sw))
        return events

    # -- weight detectors ---------------------------------------------

    def _step_weight(
        self,
        reading: SensorReading,
        epoch: float,
        sw: float,
        st: float,
        drop_delta: float,
        drop_start_epoch: float,
    ) -> Optional[HiveEvent]:
        cfg = self.cfg

        # FALL: persistence gate against single-spike noise
        if sw < cfg.fall_threshold_g:
            if self._fall_count == 0:
                self._fall_run_start = epoch
            self._fall_count += 1
            if self._fall_count == FALL_PERSIST_READINGS:
                self._block = EventKind.FALL
                self._armed = False
                return HiveEvent(
                    hive_id=reading.hive_id,
                    kind=EventKind.FALL,
                    window_start=_utc(self._fall_run_start),
                    window_end=reading.timestamp,
                    detected_at=reading.timestamp,
                    evidence={"weight_g": sw},
                )
        else:
            self._fall_count = 0
            self._fall_run_start = None

        # THEFT: near-zero weight right after a real hive mass
        if abs(sw) <= cfg.tare_tolerance_g:
            prior = None
            for t_j, sw_j in reversed(self._recent_sw):
                if sw_j >= cfg.theft_min_prior_g:
                    prior = (t_j, sw_j)
                    break
            if prior is not None:
                self._block = EventKind.THEFT
                self._armed = False
                return HiveEvent(
                    hive_id=reading.hive_id,
                    kind=EventKind.THEFT,
                    window_start=_utc(prior[0]),
                    window_end=reading.timestamp,
                    detected_at=reading.timestamp,
                    evidence={"prior_g": prior[1], "after_g": sw},
                )

        # ABSCONDING: bounded drop, then thermal evidence the colony left
        if self._armed and epoch - self._arm_epoch > ABSCOND_ARM_EXPIRY_S:
            self._armed = False
        if not self._armed:
            if (
                cfg.abscond_drop_g[0] <= drop_delta <= cfg.abscond_drop_g[1]
                and sw > cfg.tare_tolerance_g
            ):
                self._armed = True
                self._arm_epoch = epoch
                self._drop_peak = drop_delta
                self._drop_start = drop_start_epoch
                self._drop_end = epoch
        else:
            if drop_delta > self._drop_peak:
                self._drop_peak = drop_delta
                self._drop_end = epoch
        if self._armed:
            if abs(sw) <= cfg.tare_tolerance_g or sw < cfg.fall_threshold_g:
                self._armed = False  # theft / fall territory
            else:
                converged = (
                    cfg.ambient_temp_c is not None
                    and abs(st - cfg.ambient_temp_c) <= ABSCOND_AMBIENT_DELTA_C
                )
                band_exit = (
                    cfg.ambient_temp_c is None
                    and self._temp_out_start is not None
                    and epoch - self._temp_out_start >= ABSCOND_BAND_EXIT_S
                )
                if converged or band_exit:
                    self._armed = False
                    self._block = EventKind.ABSCONDING
                    return HiveEvent(
                        hive_id=reading.hive_id,
                        kind=EventKind.ABSCONDING,
                        window_start=_utc(self._drop_start),
                        window_end=reading.timestamp,
                        detected_at=reading.timestamp,
                        evidence={
                            "drop_g": self._drop_peak,
                            "minutes": (self._drop_end - self._drop_start) / 60.0,
                            "temp_after": st,
                        },
                    )
        return None

    # -- health anomaly -----------------------------------------------

    def _step_health(
        self, reading: SensorReading, epoch: float, st: float, sh: float
    ) -> Optional[HiveEvent]:
        cfg = self.cfg
        if self._block is not None or self._armed:
            self._health_out_start = None
            self._health_in_start = None
            self._health_sum_t = self._health_sum_h = 0.0
            self._health_n = 0
            return None
        out = (
            st < cfg.temp_band[0]
            or st > cfg.temp_band[1]
            or sh < cfg.humidity_band[0]
            or sh > cfg.humidity_band[1]
        )
        if out:
            if self._health_out_start is None:
                self._health_out_start = epoch
                self._health_sum_t = self._health_sum_h = 0.0
                self._health_n = 0
            self._health_in_start = None
            self._health_sum_t += st
            self._health_sum_h += sh
            self._health_n += 1
            minutes_out = (epoch - self._health_out_start) / 60.0
            if not self._health_fired and minutes_out >= cfg.health_sustain_min:
                self._health_fired = True
                return HiveEvent(
                    hive_id=reading.hive_id,
                    kind=EventKind.HEALTH_ANOMALY,
                    window_start=_utc(self._health_out_start),
                    window_end=reading.timestamp,
                    detected_at=reading.timestamp,
                    evidence={
                        "mean_temp": self._health_sum_t / self._health_n,
                        "mean_hum": self._health_sum_h / self._health_n,
                        "minutes_out": minutes_out,
                    },
                )
        else:
            if self._health_in_start is None:
                self._health_in_start = epoch
            self._health_out_start = None
            self._health_sum_t = self._health_sum_h = 0.0
            self._health_n = 0
            if self._health_fired and epoch - self._health_in_start >= HEALTH_REARM_S:
                self._health_fired = False
        return None

    # -- nightly baselines, swarm, honey flow ---------------------------

    def _night_date(self, local: datetime) -> Optional[date]:
        if local.hour == 23:
            return local.date() + timedelta(days=1)
        if local.hour == 0:
            return local.date()
        return None

    def _step_baselines(
        self, reading: SensorReading, epoch: float, sw: float
    ) -> list[HiveEvent]:
        local = datetime.fromtimestamp(epoch, tz=self.tz)
        if self._baseline_cursor is None:
            cursor = local.date()
            if local.hour >= 1:
                cursor = cursor + timedelta(days=1)
            self._baseline_cursor = cursor

        events: list[HiveEvent] = []
        # finalize every window whose end (01:00 local of the cursor date)
        # has passed; gaps may finalize several dates at once
        while True:
            cursor = self._baseline_cursor
            end_local = datetime.combine(cursor, datetime.min.time(), tzinfo=self.tz) + timedelta(
                hours=1
            )
            if local < end_local:
                break
            samples = self._night_samples.pop(cursor, [])
            if len(samples) >= BASELINE_MIN_SAMPLES:
                weight = statistics.median(s for _, s in samples)
                last_epoch = samples[-1][0]
                self._baselines[cursor] = (weight, last_epoch)
                self._baseline_dates.append(cursor)
                if len(self._baseline_dates) > 60:
                    dropped = self._baseline_dates.pop(0)
                    self._baselines.pop(dropped, None)
                swarm = self._check_swarm(reading, cursor)
                if swarm is not None:
                    events.append(swarm)
                flow = self._check_flow(reading, cursor)
                if flow is not None:
                    events.append(flow)
            self._baseline_cursor = cursor + timedelta(days=1)

        night = self._night_date(local)
        if night is not None and night >= self._baseline_cursor:
            self._night_samples.setdefault(night, []).append((epoch, sw))
        return events

    def _check_swarm(self, reading: SensorReading, day: date) -> Optional[HiveEvent]:
        cfg = self.cfg
        prior = self._baselines.get(day - timedelta(days=cfg.swarm_days))
        if prior is None:
            return None
        weight, last_epoch = self._baselines[day]
        gain = weight - prior[0]
        if gain < cfg.swarm_gain_g:
            return None
        if (
            self._last_swarm_date is not None
            and (day - self._last_swarm_date).days < SWARM_REFIRE_DAYS
        ):
            return None
        self._last_swarm_date = day
        return HiveEvent(
            hive_id=reading.hive_id,
            kind=EventKind.SWARM_RISK,
            window_start=_utc(prior[1]),
            window_end=_utc(last_epoch),
            detected_at=reading.timestamp,
            evidence={"gain_g": gain, "days": float(cfg.swarm_days)},
        )

    def _check_flow(self, reading: SensorReading, day: date) -> Optional[HiveEvent]:
        cfg = self.cfg
        if len(self._baseline_dates) < FLOW_MIN_BASELINES:
            return None
        dates = self._baseline_dates[-FLOW_FIT_BASELINES:]
        first = dates[0]
        points = [
            (float((d - first).days), self._baselines[d][0]) for d in dates
        ]
        slope, _, _ = linear_fit(points)
        cls = classify_flow(slope, cfg)
        prev = self._flow_class
        changed = prev is not None and cls != prev
        if cls is FlowClass.NO_FLOW:
            self._flow_anchor = None
        elif prev is None or prev is FlowClass.NO_FLOW:
            self._flow_anchor = self._baselines[first][0]
        self._flow_class = cls

        weight_now = self._baselines[day][0]
        if cls is not FlowClass.NO_FLOW and self._flow_anchor is not None:
            accumulated = weight_now - self._flow_anchor
        else:
            accumulated = 0.0
        eta = None
        if slope > 0 and cls is not FlowClass.NO_FLOW:
            eta = (cfg.super_capacity_g - accumulated) / slope
        self.flow_estimate = HoneyFlowEstimate(slope, cls, accumulated, eta)

        if not changed:
            return None
        evidence = {"slope_g_per_day": slope, "accumulated_g": accumulated}
        if eta is not None:
            evidence["eta_days_to_full"] = eta
        return HiveEvent(
            hive_id=reading.hive_id,
            kind=EventKind.HONEY_FLOW,
            window_start=_utc(self._baselines[first][1]),
            window_end=_utc(self._baselines[day][1]),
            detected_at=reading.timestamp,
            evidence=evidence,
        )

    # -- supplement forecast --------------------------------------------

    def _step_refill(
        self, reading: SensorReading, epoch: float, ss: float
    ) -> Optional[HiveEvent]:
        cfg = self.cfg
        win = self._syrup_window
        cutoff = epoch - REFILL_WINDOW_S
        while win and win[0][0] < cutoff:
            win.popleft()
        win.append((epoch, ss))

        if self._refill_fired:
            if ss < self._refill_min_level:
                self._refill_min_level = ss
            if ss >= self._refill_min_level + REFILL_REARM_ML:
                self._refill_fired = False

        first_epoch = win[0][0]
        if len(win) < 2 or epoch - first_epoch < REFILL_MIN_SPAN_S:
            return None
        points = [((t - first_epoch) / 3600.0, level) for t, level in win]
        slope, _, _ = linear_fit(points)
        eta = ss / -slope if slope < 0 else None
        self.refill_forecast = RefillForecast(ss, slope, eta)

        due = ss < cfg.refill_low_ml or (eta is not None and eta < REFILL_ETA_FIRE_H)
        if due and not self._refill_fired:
            self._refill_fired = True
            self._refill_min_level = ss
            evidence = {"current_ml": ss}
            if eta is not None:
                evidence["eta_hours"] = eta
            return HiveEvent(
                hive_id=reading.hive_id,
                kind=EventKind.REFILL_DUE,
                window_start=_utc(first_epoch),
                window_end=reading.timestamp,
                detected_at=reading.timestamp,
                evidence=evidence,
            )
        return None

    # -- snapshot / restore ----------------------------------------------

    def snapshot(self) -> dict:
        """Serializable engine state; versioned for restart compatibility."""
        return {
            "version": SNAPSHOT_VERSION,
            "count": self._count,
            "last_epoch": self._last_epoch,
            "out_of_order": self.out_of_order,
            "raw": {
                "w": list(self._raw_w),
                "t": list(self._raw_t),
                "h": list(self._raw_h),
                "s": list(self._raw_s),
            },
            "drop_window": [list(p) for p in self._drop_window],
            "recent_sw": [list(p) for p in self._recent_sw],
            "fall_count": self._fall_count,
            "fall_run_start": self._fall_run_start,
            "block": self._block.value if self._block else None,
            "armed": self._armed,
            "arm_epoch": self._arm_epoch,
            "drop_peak": self._drop_peak,
            "drop_start": self._drop_start,
            "drop_end": self._drop_end,
            "temp_out_start": self._temp_out_start,
            "health": {
                "out_start": self._health_out_start,
                "in_start": self._health_in_start,
                "fired": self._health_fired,
                "sum_t": self._health_sum_t,
                "sum_h": self._health_sum_h,
                "n": self._health_n,
            },
            "night_samples": {
                d.isoformat(): [list(p) for p in samples]
                for d, samples in self._night_samples.items()
            },
            "baseline_cursor": (
                self._baseline_cursor.isoformat() if self._baseline_cursor else None
            ),
            "baselines": {
                d.isoformat(): list(self._baselines[d]) for d in self._baseline_dates
            },
            "baseline_dates": [d.isoformat() for d in self._baseline_dates],
            "last_swarm_date": (
                self._last_swarm_date.isoformat() if self._last_swarm_date else None
            ),
            "flow_class": self._flow_class.value if self._flow_class else None,
            "flow_anchor": self._flow_anchor,
            "flow_estimate": self.flow_estimate.as_dict() if self.flow_estimate else None,
            "syrup_window": [list(p) for p in self._syrup_window],
            "refill_fired": self._refill_fired,
            "refill_min_level": self._refill_min_level,
            "refill_forecast": (
                self.refill_forecast.as_dict() if self.refill_forecast else None
            ),
        }

    @classmethod
    def restore(cls, snap: dict, cfg: HiveConfig, tz: tzinfo) -> "DetectionEngine":
        if snap.get("version") != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported engine snapshot version: {snap.get('version')!r}")
        eng = cls(cfg, tz)
        eng._count = snap["count"]
        eng._last_epoch = snap["last_epoch"]
        eng.out_of_order = snap["out_of_order"]
        for v in snap["raw"]["w"]:
            eng._raw_w.append(v)
        for v in snap["raw"]["t"]:
            eng._raw_t.append(v)
        for v in snap["raw"]["h"]:
            eng._raw_h.append(v)
        for v in snap["raw"]["s"]:
            eng._raw_s.append(v)
        eng._drop_window = deque(tuple(p) for p in snap["drop_window"])
        for p in snap["recent_sw"]:
            eng._recent_sw.append(tuple(p))
        eng._fall_count = snap["fall_count"]
        eng._fall_run_start = snap["fall_run_start"]
        eng._block = EventKind(snap["block"]) if snap["block"] else None
        eng._armed = snap["armed"]
        eng._arm_epoch = snap["arm_epoch"]
        eng._drop_peak = snap["drop_peak"]
        eng._drop_start = snap["drop_start"]
        eng._drop_end = snap["drop_end"]
        eng._temp_out_start = snap["temp_out_start"]
        h = snap["health"]
        eng._health_out_start = h["out_start"]
        eng._health_in_start = h["in_start"]
        eng._health_fired = h["fired"]
        eng._health_sum_t = h["sum_t"]
        eng._health_sum_h = h["sum_h"]
        eng._health_n = h["n"]
        eng._night_samples = {
            date.fromisoformat(d): [tuple(p) for p in samples]
            for d, samples in snap["night_samples"].items()
        }
        eng._baseline_cursor = (
            date.fromisoformat(snap["baseline_cursor"]) if snap["baseline_cursor"] else None
        )
        eng._baseline_dates = [date.fromisoformat(d) for d in snap["baseline_dates"]]
        eng._baselines = {
            date.fromisoformat(d): tuple(v) for d, v in snap["baselines"].items()
        }
        eng._last_swarm_date = (
            date.fromisoformat(snap["last_swarm_date"]) if snap["last_swarm_date"] else None
        )
        eng._flow_class = FlowClass(snap["flow_class"]) if snap["flow_class"] else None
        eng._flow_anchor = snap["flow_anchor"]
        if snap["flow_estimate"]:
            fe = snap["flow_estimate"]
            eng.flow_estimate = HoneyFlowEstimate(
                fe["slope_g_per_day"],
                FlowClass(fe["classification"]),
                fe["accumulated_g"],
                fe["eta_days_to_full"],
            )
        eng._syrup_window = deque(tuple(p) for p in snap["syrup_window"])
        eng._refill_fired = snap["refill_fired"]
        eng._refill_min_level = snap["refill_min_level"]
        if snap["refill_forecast"]:
            rf = snap["refill_forecast"]
            eng.refill_forecast = RefillForecast(
                rf["current_ml"], rf["slope_ml_per_hour"], rf["eta_hours_to_empty"]
            )
        return eng
