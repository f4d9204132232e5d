from __future__ import annotations

import random
import statistics
import subprocess
import sys
import textwrap
from datetime import datetime, timedelta, timezone

import pytest

from hivelink.signal import smooth
from hivelink.store import (
    CSV_HEADER,
    CorruptLog,
    JsonlLog,
    ReadingLog,
    format_number,
    format_row,
    parse_csv_time,
)

from conftest import mk_reading
from golden import TZ, canonical_csv, verbatim_csv

UTC = timezone.utc
T0 = datetime(2023, 1, 18, 0, 0, tzinfo=UTC)


@pytest.fixture
def log(tmp_path):
    log = ReadingLog("H1", tmp_path)
    yield log
    log.close()


# -- append ------------------------------------------------------------------


def test_first_append_is_row_one(log):
    assert log.append(mk_reading(T0, 0.0)) == 1


def test_reference_rows_get_indices_1_to_36(log, cfg, tz):
    assert log.import_csv(verbatim_csv(), cfg, tz) == 36
    assert len(log) == 36
    assert log.append(mk_reading(datetime(2023, 1, 19, tzinfo=UTC), 1.0)) == 37


def test_timestamps_forced_non_decreasing(log):
    log.append(mk_reading(T0 + timedelta(seconds=10), 1.0))
    log.append(mk_reading(T0, 2.0))  # arrives with an earlier stamp
    rows = log.all_readings()
    assert rows[0].timestamp <= rows[1].timestamp


def test_reopen_recovers_all_rows(tmp_path, log):
    for i in range(10):
        log.append(mk_reading(T0 + timedelta(seconds=i), float(i)))
    log.close()
    reopened = ReadingLog("H1", tmp_path)
    assert len(reopened) == 10
    assert [r.weight_g for r in reopened.all_readings()] == [float(i) for i in range(10)]
    reopened.close()


def test_torn_tail_dropped_on_reopen(tmp_path, log):
    for i in range(3):
        log.append(mk_reading(T0 + timedelta(seconds=i), float(i)))
    log.close()
    path = tmp_path / "H1" / "readings.log"
    with open(path, "ab") as fh:
        fh.write(b'deadbeef {"half a rec')  # no newline: torn write
    reopened = ReadingLog("H1", tmp_path)
    assert len(reopened) == 3
    reopened.append(mk_reading(T0 + timedelta(seconds=9), 9.0))
    reopened.close()
    again = ReadingLog("H1", tmp_path)
    assert len(again) == 4
    again.close()


def test_interior_corruption_raises(tmp_path, log):
    for i in range(3):
        log.append(mk_reading(T0 + timedelta(seconds=i), float(i)))
    log.close()
    path = tmp_path / "H1" / "readings.log"
    lines = path.read_bytes().splitlines(keepends=True)
    lines[1] = b"00000000 " + lines[1].split(b" ", 1)[1]
    path.write_bytes(b"".join(lines))
    with pytest.raises(CorruptLog):
        ReadingLog("H1", tmp_path)


def test_crash_after_append_returns_reading_survives(tmp_path):
    """Kill -9 the writer right after append() returns; the row must be
    present on reopen."""
    script = textwrap.dedent(
        """
        import os, signal, sys
        from datetime import datetime, timezone
        from hivelink.model import SensorReading
        from hivelink.store import ReadingLog

        log = ReadingLog("H1", sys.argv[1])
        reading = SensorReading(
            hive_id="H1",
            timestamp=datetime(2023, 1, 18, tzinfo=timezone.utc),
            temp_c=31.0, humidity_pct=55.0, syrup_ml=500.0, weight_g=8000.0,
            light=True,
        )
        row = log.append(reading)
        print(row, flush=True)
        os.kill(os.getpid(), signal.SIGKILL)
        """
    )
    proc = subprocess.run(
        [sys.executable, "-c", script, str(tmp_path)],
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert proc.stdout.strip() == "1"
    assert proc.returncode == -9
    log = ReadingLog("H1", tmp_path)
    assert len(log) == 1
    assert log.all_readings()[0].weight_g == 8000.0
    log.close()


# -- query_window ------------------------------------------------------------


def test_empty_window(log):
    log.append(mk_reading(T0, 1.0))
    assert log.query_window(T0, T0) == []


def test_covering_window_returns_whole_log(log):
    for i in range(20):
        log.append(mk_reading(T0 + timedelta(minutes=i), float(i)))
    rows = log.query_window(T0 - timedelta(days=1), T0 + timedelta(days=1))
    assert len(rows) == 20


def test_random_windows_match_linear_scan_oracle(log):
    rng = random.Random(42)
    for i in range(300):
        log.append(mk_reading(T0 + timedelta(seconds=rng.randint(0, 50000)), float(i)))
    stored = log.all_readings()
    for _ in range(1000):
        a = T0 + timedelta(seconds=rng.randint(-1000, 51000))
        b = a + timedelta(seconds=rng.randint(0, 20000))
        expect = [r for r in stored if a <= r.timestamp < b]
        assert log.query_window(a, b) == expect


def test_inverted_window_rejected(log):
    with pytest.raises(ValueError):
        log.query_window(T0 + timedelta(seconds=1), T0)


# -- daily baselines --------------------------------------------------------


def test_constant_night_weight_baseline(log, cfg, tz):
    night = datetime(2023, 5, 1, 23, 0, tzinfo=tz)
    for i in range(12):
        log.append(mk_reading(night + timedelta(minutes=10 * i), 10000.0))
    baseline = log.daily_baseline(datetime(2023, 5, 2).date(), tz, cfg)
    assert baseline is not None
    assert baseline.weight_g == 10000.0
    assert baseline.sample_count == 12


def test_two_samples_insufficient(log, cfg, tz):
    night = datetime(2023, 5, 1, 23, 30, tzinfo=tz)
    log.append(mk_reading(night, 10000.0))
    log.append(mk_reading(night + timedelta(minutes=30), 10000.0))
    assert log.daily_baseline(datetime(2023, 5, 2).date(), tz, cfg) is None


def test_diurnal_trace_baseline_equals_night_plateau(log, cfg, tz):
    """Day dips from forager departure must not leak into the baseline;
    verified against a brute-force median of the smoothed night window."""
    rng = random.Random(7)
    start = datetime(2023, 5, 1, 12, 0, tzinfo=tz)
    night_weights = []
    for i in range(24 * 12):  # 5-min cadence for 24 h
        ts = start + timedelta(minutes=5 * i)
        hour = ts.astimezone(tz).hour + ts.astimezone(tz).minute / 60
        dip = -300.0 if 8 <= hour <= 18 else 0.0
        w = 10000.0 + dip + rng.gauss(0, 5)
        log.append(mk_reading(ts, w))
        in_window = (hour >= 23) or (hour < 1)
        date_ok = (
            ts.astimezone(tz).date() == datetime(2023, 5, 1).date()
            and hour >= 23
            or ts.astimezone(tz).date() == datetime(2023, 5, 2).date()
            and hour < 1
        )
        if in_window and date_ok:
            night_weights.append(w)
    baseline = log.daily_baseline(datetime(2023, 5, 2).date(), tz, cfg)
    assert baseline is not None
    assert baseline.sample_count == len(night_weights)
    expect = statistics.median(smooth(night_weights, 5))
    assert baseline.weight_g == expect
    assert abs(baseline.weight_g - 10000.0) < 20  # night plateau, not the dip


# -- CSV export / import -------------------------------------------------------


def test_number_rendering_minimal_digits():
    assert format_number(30.0) == "30"
    assert format_number(30.5) == "30.5"
    assert format_number(-28.6) == "-28.6"
    assert format_number(0.87) == "0.87"
    assert format_number(508.0) == "508"


def test_row_20_renders_with_standard_noon_time():
    # some spreadsheet locales print hour 12 as 0; the exporter follows
    # the h:mm pattern instead, so noon renders as 12:36 PM
    ts = datetime(2023, 1, 18, 12, 36, tzinfo=TZ)
    reading = mk_reading(ts, -28.6, temp=30.5, hum=50.0, syrup=508.0)
    assert format_row(reading, TZ) == "01/18/2023,12:36 PM,30.5,50,508,-28.6"


def test_time_parsing_accepts_both_noon_renderings():
    a = parse_csv_time("01/18/2023", "0:36 PM", TZ)
    b = parse_csv_time("01/18/2023", "12:36 PM", TZ)
    assert a == b
    am = parse_csv_time("01/18/2023", "6:05 AM", TZ)
    assert am.astimezone(TZ).hour == 6
    midnight = parse_csv_time("01/18/2023", "12:01 AM", TZ)
    assert midnight.astimezone(TZ).hour == 0


def test_empty_range_exports_header_only(log, tz):
    assert log.export_csv(T0, T0, tz) == CSV_HEADER + "\n"


def test_import_then_export_round_trips_bit_exactly(log, cfg):
    canonical = canonical_csv()
    assert log.import_csv(canonical, cfg, TZ) == 36
    assert log.export_csv_all(TZ) == canonical


def test_verbatim_import_exports_canonical_form(log, cfg):
    log.import_csv(verbatim_csv(), cfg, TZ)
    assert log.export_csv_all(TZ) == canonical_csv()


def test_import_rejects_unknown_header(log, cfg):
    with pytest.raises(ValueError):
        log.import_csv("Date,Weight\n01/18/2023,5\n", cfg, TZ)


def test_imported_values_match_source(log, cfg):
    log.import_csv(verbatim_csv(), cfg, TZ)
    rows = log.all_readings()
    assert rows[18].weight_g == -28.6  # row 20 of the source sheet
    assert rows[18].temp_c == 30.5
    assert rows[0].syrup_ml == 528.0
    assert all(r.light for r in rows)


# -- JsonlLog -------------------------------------------------------------------


def test_jsonl_log_round_trip(tmp_path):
    log = JsonlLog(tmp_path / "events.log")
    log.append({"a": 1})
    log.append({"b": [1, 2]})
    log.close()
    again = JsonlLog(tmp_path / "events.log")
    assert again.items() == [{"a": 1}, {"b": [1, 2]}]
    again.close()
