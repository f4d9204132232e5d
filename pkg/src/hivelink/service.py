"""HTTP ingest service: device-facing ingestion compatible with the
append-row wire format, plus read, gate-control and status endpoints.

Request flow: a handler validates and persists the reading under the
hive's ingest lock (appends per hive are serialized, hives proceed in
parallel), then hands it to the detection thread over a bounded queue.
Handlers never block on detection or alert delivery; if the queue is
full the reading is still persisted and a drop counter increments.
Storage timestamps are always server receipt time; client timestamps
are never trusted.
"""

from __future__ import annotations

import logging
import queue
import threading
import urllib.parse
from datetime import datetime, timezone
from typing import Optional

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .config import ServerConfig
from .dispatch import AlertDispatcher, DispatchWorker, EventQueue
from .engine import DetectionEngine, OutOfOrderReading
from .gate import BadTtl, GateController
from .model import (
    HiveConfig,
    HiveEvent,
    SensorReading,
    ValidationError,
    raw_field_names,
    validate_reading,
)
from .store import JsonlLog, ReadingLog

logger = logging.getLogger(__name__)

FAR_PAST = datetime(1970, 1, 1, tzinfo=timezone.utc)
FAR_FUTURE = datetime(9999, 1, 1, tzinfo=timezone.utc)


class HiveRuntime:
    """Everything owned by one hive: log, engine, gate, queues, history."""

    def __init__(self, cfg: HiveConfig, server_cfg: ServerConfig):
        self.cfg = cfg
        tz = server_cfg.tz
        self.log = ReadingLog(cfg.hive_id, server_cfg.data_dir, fsync=server_cfg.fsync)
        self.engine = DetectionEngine(cfg, tz)
        self.gate = GateController(cfg, tz)
        self.ingest_lock = threading.Lock()
        self.state_lock = threading.Lock()
        self.event_log = JsonlLog(server_cfg.data_dir / cfg.hive_id / "events.log")
        self.delivery_log = JsonlLog(server_cfg.data_dir / cfg.hive_id / "deliveries.log")
        self.events: list[dict] = self.event_log.items()
        self.event_seq = max((e.get("seq", 0) for e in self.events), default=0)
        self.ack_watermark = 0
        self.pending_commands: list[dict] = []
        self.last_accepted_epoch = 0.0
        self.enqueued = 0
        self.processed = 0
        self.detect_dropped = 0
        self.out_of_order = 0

    def record_event(self, event: HiveEvent) -> dict:
        with self.state_lock:
            self.event_seq += 1
            entry = {"seq": self.event_seq, **event.as_dict()}
            self.events.append(entry)
        self.event_log.append(entry)
        return entry

    def close(self) -> None:
        self.log.close()
        self.event_log.close()
        self.delivery_log.close()


class HiveServer:
    """Shared state behind the FastAPI app; owns the worker threads."""

    def __init__(self, config: ServerConfig, dispatcher: Optional[AlertDispatcher] = None):
        self.config = config
        self.tz = config.tz
        self.hives = {cfg.hive_id: HiveRuntime(cfg, config) for cfg in config.hives}
        self.detect_queue: queue.Queue = queue.Queue(maxsize=config.detection_queue_capacity)
        self.alert_queue = EventQueue(config.alert_queue_capacity)
        self.dispatcher = dispatcher or AlertDispatcher()
        self.dispatch_worker = DispatchWorker(
            self.alert_queue,
            self.dispatcher,
            sinks_for=lambda hive_id: self.hives[hive_id].cfg.alert_sinks,
            on_result=self._record_deliveries,
        )
        self._detect_thread = threading.Thread(
            target=self._detection_loop, name="detection", daemon=True
        )
        self._stop = threading.Event()
        self._started = False

    def start(self) -> None:
        if self._started:
            return
        self._started = True
        self._detect_thread.start()
        self.dispatch_worker.start()

    def stop(self) -> None:
        if not self._started:
            return
        self._stop.set()
        self._detect_thread.join(timeout=10)
        self.dispatch_worker.stop()
        for runtime in self.hives.values():
            runtime.close()
        self._started = False

    def _record_deliveries(self, hive_id: str, records) -> None:
        runtime = self.hives.get(hive_id)
        if runtime is None:
            return
        for record in records:
            runtime.delivery_log.append(record.as_dict())

    def _detection_loop(self) -> None:
        while not self._stop.is_set():
            try:
                hive_id, reading = self.detect_queue.get(timeout=0.2)
            except queue.Empty:
                continue
            self._process_reading(self.hives[hive_id], reading)

    def _process_reading(self, runtime: HiveRuntime, reading: SensorReading) -> None:
        events: list[HiveEvent] = []
        try:
            events.extend(runtime.engine.step(reading))
        except OutOfOrderReading:
            runtime.out_of_order += 1
        with runtime.state_lock:
            command, gate_events = runtime.gate.step(reading.light, reading.timestamp)
            if command is not None:
                runtime.pending_commands.append(command.as_dict())
        events.extend(gate_events)
        for event in events:
            runtime.record_event(event)
            self.alert_queue.put(event)
        runtime.processed += 1

    # -- ingestion core (also used by tests without HTTP) ---------------

    def ingest(self, params: dict[str, str]) -> tuple[int, str, dict]:
        """Returns (status_code, body_text, headers)."""
        sensor_params = [f for f in raw_field_names() if f in params]
        hive_id = params.get("hive")
        runtime = None
        if hive_id is not None:
            runtime = self.hives.get(hive_id)
            if runtime is None:
                return 404, f"unknown hive: {hive_id}", {}
            if params.get("token") != runtime.cfg.api_token:
                return 401, "bad token", {}
        if not sensor_params:
            # compatibility wart: the original append-row endpoint answers
            # 200 with this body instead of erroring
            return 200, "No Parameters", {}
        if runtime is None:
            return 404, "unknown hive: <missing>", {}
        missing = [f for f in raw_field_names() if f not in params]
        if missing:
            return 422, f"missing field: {missing[0]}", {"X-Field": missing[0]}

        with runtime.ingest_lock:
            now = datetime.now(timezone.utc)
            min_gap = self.config.min_ingest_interval_s
            if min_gap > 0 and now.timestamp() - runtime.last_accepted_epoch < min_gap:
                return 429, "too fast: minimum inter-reading spacing not met", {}
            try:
                reading = validate_reading(params, runtime.cfg, now)
            except ValidationError as exc:
                return 422, str(exc), {"X-Field": exc.field}
            row_index = runtime.log.append(reading)
            stored = runtime.log.latest()
            runtime.last_accepted_epoch = now.timestamp()
            runtime.enqueued += 1
            try:
                self.detect_queue.put_nowait((hive_id, stored))
            except queue.Full:
                runtime.enqueued -= 1
                runtime.detect_dropped += 1
        return 200, "OK", {"X-Row-Index": str(row_index)}

    def drain(self, timeout: float = 30.0) -> bool:
        """Block until detection and alerting caught up (test helper)."""
        import time as time_mod

        deadline = time_mod.monotonic() + timeout
        while time_mod.monotonic() < deadline:
            busy = self.detect_queue.qsize() > 0 or len(self.alert_queue) > 0
            if not busy:
                pending = any(
                    rt.processed < rt.enqueued for rt in self.hives.values()
                )
                if not pending:
                    return True
            time_mod.sleep(0.02)
        return False


def _token_from(request: Request, params: dict) -> str:
    token = params.get("token")
    if token:
        return token
    auth = request.headers.get("authorization", "")
    if auth.lower().startswith("bearer "):
        return auth[7:]
    return ""


def build_app(server: HiveServer) -> FastAPI:
    app = FastAPI(title="hivelink", docs_url=None, redoc_url=None)
    app.state.server = server

    def _auth_read(request: Request) -> Optional[JSONResponse]:
        token = _token_from(request, dict(request.query_params))
        if token != server.config.read_token:
            return JSONResponse({"error": "bad token"}, status_code=401)
        return None

    def _auth_operator(request: Request, body: dict) -> Optional[JSONResponse]:
        token = body.get("token") or _token_from(request, dict(request.query_params))
        if token != server.config.operator_token:
            return JSONResponse({"error": "bad token"}, status_code=401)
        return None

    def _runtime_or_404(hive_id: str):
        runtime = server.hives.get(hive_id)
        if runtime is None:
            return None, JSONResponse({"error": f"unknown hive: {hive_id}"}, status_code=404)
        return runtime, None

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "hives": sorted(server.hives)}

    # the ingest core is sub-millisecond and never blocks on detection or
    # alerting, so it runs inline on the event loop (no threadpool hop)
    @app.get("/ingest")
    async def ingest_get(request: Request):
        status, body, headers = server.ingest(dict(request.query_params))
        if status in (200, 429):
            return PlainTextResponse(body, status_code=status, headers=headers)
        return JSONResponse({"error": body}, status_code=status, headers=headers)

    @app.post("/ingest")
    async def ingest_post(request: Request, body: bytes = Body(default=b"")):
        params = dict(request.query_params)
        if body:
            params.update(dict(urllib.parse.parse_qsl(body.decode("utf-8", "replace"))))
        status, text, headers = server.ingest(params)
        if status in (200, 429):
            return PlainTextResponse(text, status_code=status, headers=headers)
        return JSONResponse({"error": text}, status_code=status, headers=headers)

    @app.get("/hives/{hive_id}/readings")
    def readings(hive_id: str, request: Request):
        params = dict(request.query_params)
        runtime, err = _runtime_or_404(hive_id)
        if err:
            return err
        denied = _auth_read(request)
        if denied:
            return denied
        from_text = params.get("from")
        to_text = params.get("to")
        format = params.get("format", "structured")
        try:
            t0 = datetime.fromisoformat(from_text) if from_text else FAR_PAST
            t1 = datetime.fromisoformat(to_text) if to_text else FAR_FUTURE
            if t0.tzinfo is None or t1.tzinfo is None:
                t0 = t0.replace(tzinfo=timezone.utc)
                t1 = t1.replace(tzinfo=timezone.utc)
        except ValueError:
            return JSONResponse({"error": "unparseable range"}, status_code=416)
        if t0 > t1:
            return JSONResponse({"error": "range start after end"}, status_code=416)
        if format == "csv":
            text = runtime.log.export_csv(t0, t1, server.tz)
            return PlainTextResponse(text, media_type="text/csv; charset=utf-8")
        rows = runtime.log.query_window(t0, t1)
        return {"hive_id": hive_id, "readings": [r.as_dict() for r in rows]}

    @app.get("/hives/{hive_id}/events")
    def events(hive_id: str, request: Request):
        params = dict(request.query_params)
        runtime, err = _runtime_or_404(hive_id)
        if err:
            return err
        denied = _auth_read(request)
        if denied:
            return denied
        from_text, to_text = params.get("from"), params.get("to")
        try:
            t0 = datetime.fromisoformat(from_text) if from_text else FAR_PAST
            t1 = datetime.fromisoformat(to_text) if to_text else FAR_FUTURE
        except ValueError:
            return JSONResponse({"error": "unparseable range"}, status_code=416)
        with runtime.state_lock:
            items = [
                e
                for e in runtime.events
                if t0 <= datetime.fromisoformat(e["detected_at"]) < t1
            ]
        return {"hive_id": hive_id, "events": items}

    @app.post("/hives/{hive_id}/events/ack")
    def ack_events(hive_id: str, request: Request, body: dict = Body(default={})):
        runtime, err = _runtime_or_404(hive_id)
        if err:
            return err
        denied = _auth_operator(request, body)
        if denied:
            return denied
        up_to = int(body.get("up_to", runtime.event_seq))
        with runtime.state_lock:
            runtime.ack_watermark = max(runtime.ack_watermark, up_to)
            unacked = sum(1 for e in runtime.events if e["seq"] > runtime.ack_watermark)
        return {"acknowledged_through": runtime.ack_watermark, "unacknowledged": unacked}

    @app.post("/hives/{hive_id}/gate")
    def gate_override(hive_id: str, request: Request, body: dict = Body(default={})):
        runtime, err = _runtime_or_404(hive_id)
        if err:
            return err
        denied = _auth_operator(request, body)
        if denied:
            return denied
        action = str(body.get("action", "")).lower()
        ttl = body.get("ttl_min")
        now = datetime.now(timezone.utc)
        try:
            with runtime.state_lock:
                command, events = runtime.gate.apply_override(
                    action, float(ttl) if ttl is not None else None, now
                )
                if command is not None:
                    runtime.pending_commands.append(command.as_dict())
        except BadTtl as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        for event in events:
            runtime.record_event(event)
            server.alert_queue.put(event)
        return {"hive_id": hive_id, "gate": runtime.gate.state_dict()}

    @app.get("/hives/{hive_id}/commands")
    def commands(hive_id: str, request: Request):
        runtime, err = _runtime_or_404(hive_id)
        if err:
            return err
        token = _token_from(request, dict(request.query_params))
        if token != runtime.cfg.api_token:
            return JSONResponse({"error": "bad token"}, status_code=401)
        with runtime.state_lock:
            pending = runtime.pending_commands
            runtime.pending_commands = []
        return {"hive_id": hive_id, "commands": pending}

    @app.get("/hives/{hive_id}/deliveries")
    def deliveries(hive_id: str, request: Request):
        runtime, err = _runtime_or_404(hive_id)
        if err:
            return err
        denied = _auth_read(request)
        if denied:
            return denied
        return {"hive_id": hive_id, "deliveries": runtime.delivery_log.items()}

    @app.get("/hives/{hive_id}/status")
    def status(hive_id: str, request: Request):
        runtime, err = _runtime_or_404(hive_id)
        if err:
            return err
        denied = _auth_read(request)
        if denied:
            return denied
        latest = runtime.log.latest()
        engine = runtime.engine
        with runtime.state_lock:
            unacked = sum(1 for e in runtime.events if e["seq"] > runtime.ack_watermark)
            gate_state = runtime.gate.state_dict()
        return {
            "hive_id": hive_id,
            "latest_reading": latest.as_dict() if latest else None,
            "gate": gate_state,
            "forecasts": {
                "honey_flow": engine.flow_estimate.as_dict() if engine.flow_estimate else None,
                "refill": engine.refill_forecast.as_dict() if engine.refill_forecast else None,
            },
            "unacknowledged_events": unacked,
            "counters": {
                "rows": len(runtime.log),
                "detect_enqueued": runtime.enqueued,
                "detect_processed": runtime.processed,
                "detect_dropped": runtime.detect_dropped,
                "out_of_order": runtime.out_of_order,
                "alert_dropped": server.alert_queue.dropped,
            },
        }

    return app


def create_server(config: ServerConfig, dispatcher: Optional[AlertDispatcher] = None):
    """Construct and start a server plus its ASGI app."""
    server = HiveServer(config, dispatcher=dispatcher)
    server.start()
    return server, build_app(server)
