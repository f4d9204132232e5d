"""Append-only per-hive time-series persistence with windowed queries,
nightly weight baselines and canonical CSV import/export.

Each hive owns one newline-delimited log file of checksummed JSON records
plus an in-memory index rebuilt on open.  One writer per hive; readers see
a consistent prefix.
"""

from __future__ import annotations

import json
import os
import threading
import zlib
from bisect import bisect_left
from datetime import date, datetime, time, timedelta, timezone, tzinfo
from pathlib import Path
from typing import Optional

from .model import HiveConfig, SensorReading
from .signal import smooth

CSV_HEADER = (
    "Date,Time,Hive Temperature(°C),Hive Humidity(%),"
    "Supplement Quantity(mL),Hive Weight(Grams)"
)

# Nightly reference window spanning a date's midnight: all foragers are
# home, so the smoothed weight is the true colony+stores mass.
BASELINE_WINDOW_START = time(23, 0)
BASELINE_WINDOW_END = time(1, 0)
BASELINE_MIN_SAMPLES = 3


class CorruptLog(Exception):
    """A non-final record failed its checksum; the log needs operator care."""


class StorageFull(Exception):
    pass


class DailyBaseline:
    """Median smoothed weight over one night window."""

    __slots__ = ("hive_id", "local_date", "weight_g", "sample_count")

    def __init__(self, hive_id: str, local_date: date, weight_g: float, sample_count: int):
        self.hive_id = hive_id
        self.local_date = local_date
        self.weight_g = weight_g
        self.sample_count = sample_count

    def __repr__(self):
        return (
            f"DailyBaseline({self.hive_id}, {self.local_date}, "
            f"{self.weight_g:.1f} g, n={self.sample_count})"
        )


def format_number(value: float) -> str:
    """Render with minimal digits: 30 not 30.0, -28.6 kept as -28.6."""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def format_row(reading: SensorReading, tz: tzinfo) -> str:
    """One CSV data row in the display timezone.

    Date is MM/DD/YYYY; Time is h:mm AM/PM with no leading zero on the
    hour (noon renders as 12:36 PM).
    """
    local = reading.timestamp.astimezone(tz)
    hour12 = local.hour % 12 or 12
    ampm = "AM" if local.hour < 12 else "PM"
    return ",".join(
        (
            f"{local.month:02d}/{local.day:02d}/{local.year:04d}",
            f"{hour12}:{local.minute:02d} {ampm}",
            format_number(reading.temp_c),
            format_number(reading.humidity_pct),
            format_number(reading.syrup_ml),
            format_number(reading.weight_g),
        )
    )


def parse_csv_time(date_text: str, time_text: str, tz: tzinfo) -> datetime:
    """Parse `MM/DD/YYYY` plus `h:mm AM/PM`.

    Hour 0 is accepted as an alias for 12 (some spreadsheet locales render
    12:36 PM as 0:36 PM); both forms import to the same instant.
    """
    month, day, year = (int(p) for p in date_text.strip().split("/"))
    clock, ampm = time_text.strip().split()
    hour, minute = (int(p) for p in clock.split(":"))
    ampm = ampm.upper()
    if ampm not in ("AM", "PM"):
        raise ValueError(f"bad AM/PM marker: {time_text!r}")
    if hour == 0:
        hour = 12
    if not 1 <= hour <= 12:
        raise ValueError(f"bad hour in {time_text!r}")
    hour = hour % 12
    if ampm == "PM":
        hour += 12
    local = datetime(year, month, day, hour, minute, tzinfo=tz)
    return local.astimezone(timezone.utc)


class ReadingLog:
    """Durable append-only reading log for a single hive.

    Record format: one line per reading, `crc32hex<space>json`.  A torn
    final line (crash mid-write) is dropped on open; a bad checksum
    anywhere else raises CorruptLog.
    """

    def __init__(self, hive_id: str, data_dir: Path | str, fsync: bool = False):
        self.hive_id = hive_id
        self.dir = Path(data_dir) / hive_id
        self.dir.mkdir(parents=True, exist_ok=True)
        self.path = self.dir / "readings.log"
        self.fsync = fsync
        self._lock = threading.Lock()
        self._readings: list[SensorReading] = []
        self._timestamps: list[float] = []  # epoch seconds, non-decreasing
        self._recover()
        self._fh = open(self.path, "a", encoding="utf-8")

    def _recover(self) -> None:
        if not self.path.exists():
            return
        raw = self.path.read_bytes()
        if not raw:
            return
        lines = raw.split(b"\n")
        trailing_partial = lines and lines[-1] != b""
        if not trailing_partial:
            lines = lines[:-1]
        keep = 0
        for idx, line in enumerate(lines):
            is_last = idx == len(lines) - 1
            try:
                crc_hex, payload = line.split(b" ", 1)
                if int(crc_hex, 16) != zlib.crc32(payload):
                    raise ValueError("checksum mismatch")
                reading = SensorReading.from_dict(json.loads(payload))
            except Exception:
                if is_last:
                    break  # torn tail from a crash; drop it
                raise CorruptLog(f"{self.path}: bad record at line {idx + 1}")
            self._readings.append(reading)
            self._timestamps.append(reading.timestamp.timestamp())
            keep = idx + 1
        if keep < len(lines) or trailing_partial:
            good = b"\n".join(lines[:keep])
            if good:
                good += b"\n"
            self.path.write_bytes(good)

    def append(self, reading: SensorReading) -> int:
        """Persist one validated reading; durable before return.

        Returns the 1-based row index.  Timestamps are forced non-decreasing
        within the log.
        """
        with self._lock:
            ts = reading.timestamp.timestamp()
            if self._timestamps and ts < self._timestamps[-1]:
                reading = SensorReading(
                    hive_id=reading.hive_id,
                    timestamp=datetime.fromtimestamp(self._timestamps[-1], tz=timezone.utc),
                    temp_c=reading.temp_c,
                    humidity_pct=reading.humidity_pct,
                    syrup_ml=reading.syrup_ml,
                    weight_g=reading.weight_g,
                    light=reading.light,
                )
                ts = self._timestamps[-1]
            payload = json.dumps(reading.as_dict(), separators=(",", ":")).encode()
            line = f"{zlib.crc32(payload):08x} ".encode() + payload + b"\n"
            try:
                self._fh.write(line.decode())
                self._fh.flush()
                if self.fsync:
                    os.fsync(self._fh.fileno())
            except OSError as exc:
                raise StorageFull(f"{self.path}: {exc}") from exc
            self._readings.append(reading)
            self._timestamps.append(ts)
            return len(self._readings)

    def close(self) -> None:
        self._fh.close()

    def __len__(self) -> int:
        return len(self._readings)

    @property
    def last_timestamp(self) -> Optional[datetime]:
        return self._readings[-1].timestamp if self._readings else None

    def latest(self) -> Optional[SensorReading]:
        return self._readings[-1] if self._readings else None

    def query_window(self, t0: datetime, t1: datetime) -> list[SensorReading]:
        """Readings with t0 <= timestamp < t1, in storage order."""
        if t0 > t1:
            raise ValueError("query window start after end")
        lo = bisect_left(self._timestamps, t0.timestamp())
        hi = bisect_left(self._timestamps, t1.timestamp())
        return self._readings[lo:hi]

    def all_readings(self) -> list[SensorReading]:
        return list(self._readings)

    def daily_baseline(
        self, local_date: date, tz: tzinfo, cfg: HiveConfig
    ) -> Optional[DailyBaseline]:
        """Median smoothed weight over the 23:00-01:00 window spanning
        `local_date`'s midnight, or None when fewer than 3 samples exist."""
        start = datetime.combine(
            local_date - timedelta(days=1), BASELINE_WINDOW_START, tzinfo=tz
        )
        end = datetime.combine(local_date, BASELINE_WINDOW_END, tzinfo=tz)
        rows = self.query_window(start.astimezone(timezone.utc), end.astimezone(timezone.utc))
        if len(rows) < BASELINE_MIN_SAMPLES:
            return None
        weights = [r.weight_g for r in rows]
        k = min(cfg.smoothing_k, len(weights))
        if k % 2 == 0:
            k -= 1
        smoothed = smooth(weights, k)
        ordered = sorted(smoothed)
        n = len(ordered)
        mid = n // 2
        median = ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2.0
        return DailyBaseline(self.hive_id, local_date, median, len(rows))

    def export_csv(self, t0: datetime, t1: datetime, tz: tzinfo) -> str:
        """Canonical CSV for [t0, t1); header line only when the range is empty."""
        rows = self.query_window(t0, t1)
        lines = [CSV_HEADER]
        lines.extend(format_row(r, tz) for r in rows)
        return "\n".join(lines) + "\n"

    def export_csv_all(self, tz: tzinfo) -> str:
        lines = [CSV_HEADER]
        lines.extend(format_row(r, tz) for r in self._readings)
        return "\n".join(lines) + "\n"

    def import_csv(
        self,
        text: str,
        cfg: HiveConfig,
        tz: tzinfo,
        default_light: bool = True,
    ) -> int:
        """Append every data row of a canonical-format CSV; returns row count.

        The canonical file format carries no light column, so imported
        readings take `default_light` (the reference dataset was captured
        at midday).
        """
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            return 0
        header = lines[0].lstrip("﻿").strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header!r}")
        count = 0
        for line in lines[1:]:
            parts = line.split(",")
            if len(parts) != 6:
                raise ValueError(f"expected 6 columns, got {len(parts)}: {line!r}")
            ts = parse_csv_time(parts[0], parts[1], tz)
            self.append(
                SensorReading(
                    hive_id=self.hive_id,
                    timestamp=ts,
                    temp_c=float(parts[2]),
                    humidity_pct=float(parts[3]),
                    syrup_ml=float(parts[4]),
                    weight_g=float(parts[5]),
                    light=default_light,
                )
            )
            count += 1
        return count


class JsonlLog:
    """Small checksummed JSONL append log (events, delivery records)."""

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._items: list[dict] = []
        self._load()
        self._fh = open(self.path, "a", encoding="utf-8")

    def _load(self) -> None:
        if not self.path.exists():
            return
        with open(self.path, "rb") as fh:
            for line in fh:
                line = line.rstrip(b"\n")
                if not line:
                    continue
                try:
                    crc_hex, payload = line.split(b" ", 1)
                    if int(crc_hex, 16) != zlib.crc32(payload):
                        continue
                    self._items.append(json.loads(payload))
                except Exception:
                    continue  # drop torn/corrupt tail records

    def append(self, item: dict) -> None:
        with self._lock:
            payload = json.dumps(item, separators=(",", ":")).encode()
            self._fh.write(f"{zlib.crc32(payload):08x} " + payload.decode() + "\n")
            self._fh.flush()
            self._items.append(item)

    def items(self) -> list[dict]:
        with self._lock:
            return list(self._items)

    def close(self) -> None:
        self._fh.close()
