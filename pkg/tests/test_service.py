from __future__ import annotations

import threading
from datetime import datetime, timedelta, timezone

import pytest
from fastapi.testclient import TestClient

from hivelink.dispatch import AlertSink
from hivelink.service import HiveServer, build_app

from golden import TZ, verbatim_csv
from server_util import LiveServer, make_config

ROW20 = {"temp": "30.5", "hum": "50", "syrup": "508", "weight": "-28.6", "light": "1"}


@pytest.fixture
def server(tmp_path):
    config = make_config(tmp_path / "data", sinks=[AlertSink(kind="log")])
    hive_server = HiveServer(config)
    hive_server.start()
    yield hive_server
    hive_server.stop()


@pytest.fixture
def client(server):
    return TestClient(build_app(server))


def ingest_params(**overrides):
    params = {"hive": "H1", "token": "tok-H1", **ROW20}
    params.update(overrides)
    return params


# -- ingest contract -----------------------------------------------------------


def test_ingest_ok_persists_one_reading(server, client):
    resp = client.get("/ingest", params=ingest_params())
    assert resp.status_code == 200
    assert resp.text == "OK"
    assert resp.headers["x-row-index"] == "1"
    log = server.hives["H1"].log
    assert len(log) == 1
    reading = log.latest()
    assert reading.weight_g == -28.6
    assert reading.temp_c == 30.5


def test_parameterless_request_is_no_parameters(server, client):
    resp = client.get("/ingest", params={"hive": "H1", "token": "tok-H1"})
    assert resp.status_code == 200
    assert resp.text == "No Parameters"
    assert len(server.hives["H1"].log) == 0
    # fully bare request behaves the same
    resp = client.get("/ingest")
    assert resp.status_code == 200
    assert resp.text == "No Parameters"


def test_bad_token_is_401(server, client):
    resp = client.get("/ingest", params=ingest_params(token="WRONG"))
    assert resp.status_code == 401
    assert len(server.hives["H1"].log) == 0


def test_unknown_hive_is_404(client):
    resp = client.get("/ingest", params=ingest_params(hive="NOPE", token="x"))
    assert resp.status_code == 404


def test_out_of_range_value_is_422_naming_field(server, client):
    resp = client.get("/ingest", params=ingest_params(hum="101"))
    assert resp.status_code == 422
    assert "humidity_pct" in resp.text
    assert resp.headers["x-field"] == "humidity_pct"
    assert len(server.hives["H1"].log) == 0


def test_malformed_number_is_422(server, client):
    resp = client.get("/ingest", params=ingest_params(weight="heavy"))
    assert resp.status_code == 422
    assert "weight" in resp.text
    assert len(server.hives["H1"].log) == 0


def test_partial_sensor_params_name_missing_field(server, client):
    params = {"hive": "H1", "token": "tok-H1", "temp": "31"}
    resp = client.get("/ingest", params=params)
    assert resp.status_code == 422
    assert "hum" in resp.text


def test_post_form_body_accepted(server, client):
    body = "hive=H1&token=tok-H1&temp=30.5&hum=50&syrup=508&weight=-28.6&light=1"
    resp = client.post(
        "/ingest", content=body, headers={"content-type": "application/x-www-form-urlencoded"}
    )
    assert resp.status_code == 200
    assert resp.text == "OK"
    assert len(server.hives["H1"].log) == 1


def test_rate_limit_applies_when_configured(tmp_path):
    config = make_config(tmp_path / "data", min_interval=1.0)
    server = HiveServer(config)
    server.start()
    try:
        client = TestClient(build_app(server))
        first = client.get("/ingest", params=ingest_params())
        assert first.status_code == 200
        second = client.get("/ingest", params=ingest_params())
        assert second.status_code == 429
        assert len(server.hives["H1"].log) == 1
    finally:
        server.stop()


def test_row_indices_gapless_under_concurrent_senders(tmp_path):
    """16 concurrent senders x 100 readings: per-hive indices must be a
    permutation-free 1..1600 run."""
    config = make_config(tmp_path / "data", min_interval=0.0)
    with LiveServer(config) as live:
        import httpx

        indices = []
        lock = threading.Lock()
        errors = []

        def send(worker: int):
            try:
                with httpx.Client(base_url=live.base_url, timeout=30) as client:
                    mine = []
                    for i in range(100):
                        resp = client.get("/ingest", params=ingest_params())
                        assert resp.status_code == 200, resp.text
                        mine.append(int(resp.headers["x-row-index"]))
                    with lock:
                        indices.extend(mine)
            except Exception as exc:  # surface failures to the main thread
                with lock:
                    errors.append(exc)

        threads = [threading.Thread(target=send, args=(w,)) for w in range(16)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors, errors[:3]
        assert sorted(indices) == list(range(1, 1601))
        assert len(live.hive_server.hives["H1"].log) == 1600


# -- read API ---------------------------------------------------------------------


def seed_reference_rows(server: HiveServer):
    runtime = server.hives["H1"]
    runtime.log.import_csv(verbatim_csv(), runtime.cfg, server.tz)


def test_full_range_query_returns_36_rows(server, client):
    seed_reference_rows(server)
    resp = client.get(
        "/hives/H1/readings", params={"token": "read-secret", "format": "structured"}
    )
    assert resp.status_code == 200
    assert len(resp.json()["readings"]) == 36


def test_csv_query_is_bit_exact_with_store_export(server, client):
    seed_reference_rows(server)
    resp = client.get("/hives/H1/readings", params={"token": "read-secret", "format": "csv"})
    assert resp.status_code == 200
    assert resp.text == server.hives["H1"].log.export_csv_all(server.tz)


def test_equal_bounds_is_empty_page_not_error(server, client):
    seed_reference_rows(server)
    t = "2023-01-18T12:36:00+05:30"
    resp = client.get(
        "/hives/H1/readings",
        params={"token": "read-secret", "from": t, "to": t, "format": "structured"},
    )
    assert resp.status_code == 200
    assert resp.json()["readings"] == []


def test_inverted_or_bad_range_is_416(server, client):
    seed_reference_rows(server)
    resp = client.get(
        "/hives/H1/readings",
        params={
            "token": "read-secret",
            "from": "2023-01-19T00:00:00+05:30",
            "to": "2023-01-18T00:00:00+05:30",
        },
    )
    assert resp.status_code == 416
    resp = client.get(
        "/hives/H1/readings", params={"token": "read-secret", "from": "not-a-time"}
    )
    assert resp.status_code == 416


def test_read_requires_token(server, client):
    resp = client.get("/hives/H1/readings")
    assert resp.status_code == 401
    resp = client.get("/hives/NOPE/readings", params={"token": "read-secret"})
    assert resp.status_code == 404


def test_random_subranges_match_linear_scan(server, client):
    import random

    seed_reference_rows(server)
    stored = server.hives["H1"].log.all_readings()
    rng = random.Random(5)
    base = datetime(2023, 1, 18, 12, 30, tzinfo=TZ)
    for _ in range(50):
        a = base + timedelta(seconds=rng.randint(0, 600))
        b = a + timedelta(seconds=rng.randint(0, 600))
        resp = client.get(
            "/hives/H1/readings",
            params={
                "token": "read-secret",
                "from": a.isoformat(),
                "to": b.isoformat(),
                "format": "structured",
            },
        )
        expect = [r for r in stored if a <= r.timestamp < b]
        assert len(resp.json()["readings"]) == len(expect)


# -- gate override ------------------------------------------------------------------


def test_gate_override_round_trip(server, client):
    resp = client.post(
        "/hives/H1/gate",
        json={"action": "close", "ttl_min": 60, "token": "op-secret"},
    )
    assert resp.status_code == 200
    gate = resp.json()["gate"]
    assert gate["mode"] == "OVERRIDE_CLOSED"
    assert gate["position"] == "CLOSED"
    assert gate["override_expiry"] is not None

    resp = client.get("/hives/H1/commands", params={"token": "tok-H1"})
    commands = resp.json()["commands"]
    assert [c["command"] for c in commands] == ["CLOSED"]
    # pull model: a second poll returns nothing
    resp = client.get("/hives/H1/commands", params={"token": "tok-H1"})
    assert resp.json()["commands"] == []

    resp = client.post("/hives/H1/gate", json={"action": "auto", "token": "op-secret"})
    assert resp.json()["gate"]["mode"] == "AUTO"


def test_gate_override_auth_and_validation(server, client):
    resp = client.post("/hives/H1/gate", json={"action": "close", "ttl_min": 60})
    assert resp.status_code == 401
    resp = client.post(
        "/hives/H1/gate", json={"action": "sideways", "token": "op-secret"}
    )
    assert resp.status_code == 422
    resp = client.post(
        "/hives/H1/gate", json={"action": "close", "ttl_min": 0, "token": "op-secret"}
    )
    assert resp.status_code == 422


def test_gate_override_emits_gate_changed_event(server, client):
    client.post(
        "/hives/H1/gate", json={"action": "close", "ttl_min": 30, "token": "op-secret"}
    )
    resp = client.get("/hives/H1/events", params={"token": "read-secret"})
    kinds = [e["kind"] for e in resp.json()["events"]]
    assert kinds == ["GATE_CHANGED"]


# -- detection wiring ------------------------------------------------------------------


def test_theft_through_ingest_surfaces_event_and_delivery(server, client):
    for _ in range(8):
        assert client.get("/ingest", params=ingest_params(weight="9000")).status_code == 200
    for _ in range(8):
        assert client.get("/ingest", params=ingest_params(weight="10")).status_code == 200
    assert server.drain(timeout=10)

    resp = client.get("/hives/H1/events", params={"token": "read-secret"})
    events = resp.json()["events"]
    theft = [e for e in events if e["kind"] == "THEFT"]
    assert len(theft) == 1
    assert theft[0]["severity"] == "CRITICAL"

    resp = client.get("/hives/H1/deliveries", params={"token": "read-secret"})
    deliveries = resp.json()["deliveries"]
    assert any(
        d["sink"] == "log" and d["event"]["kind"] == "THEFT" and d["delivered_at"]
        for d in deliveries
    )

    status = client.get("/hives/H1/status", params={"token": "read-secret"}).json()
    assert status["unacknowledged_events"] >= 1
    ack = client.post(
        "/hives/H1/events/ack", json={"token": "op-secret"}
    ).json()
    assert ack["unacknowledged"] == 0


def test_status_shape(server, client):
    client.get("/ingest", params=ingest_params())
    assert server.drain(timeout=10)
    status = client.get("/hives/H1/status", params={"token": "read-secret"}).json()
    assert status["hive_id"] == "H1"
    assert status["latest_reading"]["weight_g"] == -28.6
    assert status["gate"]["position"] in ("OPEN", "CLOSED")
    assert "honey_flow" in status["forecasts"] and "refill" in status["forecasts"]
    counters = status["counters"]
    assert counters["rows"] == 1
    assert counters["detect_processed"] == 1
    assert counters["detect_dropped"] == 0


def test_healthz(client):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "hives": ["H1"]}


def test_storage_timestamps_are_server_side(server, client):
    before = datetime.now(timezone.utc)
    client.get("/ingest", params=ingest_params())
    after = datetime.now(timezone.utc)
    stored = server.hives["H1"].log.latest()
    assert before <= stored.timestamp <= after
