"""Alert delivery: webhook-compatible sinks with retry, dedup and
rate limiting.

Dispatch never blocks ingestion or detection: events arrive over a
bounded queue whose overflow policy drops the oldest lowest-severity
items first and never drops CRITICAL events.
"""

from __future__ import annotations

import logging
import threading
import time as time_mod
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Optional

import httpx

from .model import EventKind, HiveEvent, Severity

logger = logging.getLogger(__name__)

DEDUP_WINDOW_S = 12 * 3600.0
BACKOFF_BASE_S = 1.0
BACKOFF_FACTOR = 2.0
MAX_ATTEMPTS = 5
REQUEST_TIMEOUT_S = 10.0

_SEVERITY_RANK = {Severity.INFO: 0, Severity.WARNING: 1, Severity.CRITICAL: 2}


@dataclass
class AlertSink:
    """One delivery target: maker-style webhook, generic webhook, or log."""

    kind: str  # ifttt | webhook | log
    url: str = ""  # base URL for ifttt, full URL for webhook
    event: str = "hive_alert"  # ifttt event name
    key: str = ""  # ifttt maker key
    rate_limit_per_hour: int = 60
    enabled: bool = True

    def __post_init__(self):
        if self.kind not in ("ifttt", "webhook", "log"):
            raise ValueError(f"unknown sink kind: {self.kind!r}")
        if self.kind == "ifttt" and not (self.url and self.key):
            raise ValueError("ifttt sink needs url and key")
        if self.kind == "webhook" and not self.url:
            raise ValueError("webhook sink needs url")
        if self.rate_limit_per_hour < 1:
            raise ValueError("rate limit must be >= 1 per hour")

    def describe(self) -> str:
        if self.kind == "ifttt":
            return f"ifttt:{self.url}/trigger/{self.event}"
        if self.kind == "webhook":
            return f"webhook:{self.url}"
        return "log"


@dataclass
class DeliveryRecord:
    event: dict
    sink: str
    attempts: int = 0
    last_status: Optional[str] = None
    delivered_at: Optional[datetime] = None

    def as_dict(self) -> dict:
        return {
            "event": self.event,
            "sink": self.sink,
            "attempts": self.attempts,
            "last_status": self.last_status,
            "delivered_at": self.delivered_at.isoformat() if self.delivered_at else None,
        }


class EventQueue:
    """Bounded queue with severity-aware overflow.

    When full, the oldest INFO item is evicted first, then the oldest
    WARNING; CRITICAL items are never evicted and are always accepted
    (the queue may exceed capacity rather than drop one).  An INFO or
    WARNING arrival that cannot evict anything is itself dropped.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._items: list[HiveEvent] = []
        self._lock = threading.Lock()
        self._ready = threading.Condition(self._lock)
        self.dropped = 0
        self._closed = False

    def put(self, event: HiveEvent) -> bool:
        with self._ready:
            if len(self._items) >= self.capacity:
                victim = None
                for rank in (0, 1):  # INFO first, then WARNING
                    for idx, queued in enumerate(self._items):
                        if _SEVERITY_RANK[queued.severity] == rank:
                            victim = idx
                            break
                    if victim is not None:
                        break
                if victim is not None:
                    del self._items[victim]
                    self.dropped += 1
                elif event.severity is not Severity.CRITICAL:
                    self.dropped += 1
                    return False
            self._items.append(event)
            self._ready.notify()
            return True

    def get(self, timeout: Optional[float] = None) -> Optional[HiveEvent]:
        with self._ready:
            if not self._items and not self._closed:
                self._ready.wait(timeout)
            if self._items:
                return self._items.pop(0)
            return None

    def close(self) -> None:
        with self._ready:
            self._closed = True
            self._ready.notify_all()

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)

    def snapshot(self) -> list[HiveEvent]:
        with self._lock:
            return list(self._items)


def _default_post(url: str, payload: dict, timeout: float) -> int:
    resp = httpx.post(url, json=payload, timeout=timeout)
    return resp.status_code


class AlertDispatcher:
    """Delivers events to sinks with exponential-backoff retry and
    (hive, kind) dedup; GATE_CHANGED is exempt from dedup."""

    def __init__(
        self,
        post: Callable[[str, dict, float], int] = _default_post,
        sleep: Callable[[float], None] = time_mod.sleep,
        clock: Callable[[], float] = time_mod.time,
        on_record: Optional[Callable[[DeliveryRecord], None]] = None,
    ):
        self._post = post
        self._sleep = sleep
        self._clock = clock
        self._on_record = on_record
        self._last_delivered: dict[tuple[str, EventKind], float] = {}
        self._sink_history: dict[str, list[float]] = {}
        self._lock = threading.Lock()

    # -- suppression ----------------------------------------------------

    def _suppressed(self, event: HiveEvent) -> bool:
        if event.kind is EventKind.GATE_CHANGED:
            return False
        with self._lock:
            last = self._last_delivered.get((event.hive_id, event.kind))
        return last is not None and self._clock() - last < DEDUP_WINDOW_S

    def _mark_delivered(self, event: HiveEvent) -> None:
        with self._lock:
            self._last_delivered[(event.hive_id, event.kind)] = self._clock()

    def _rate_limited(self, sink: AlertSink) -> bool:
        now = self._clock()
        with self._lock:
            history = self._sink_history.setdefault(sink.describe(), [])
            history[:] = [t for t in history if now - t < 3600.0]
            return len(history) >= sink.rate_limit_per_hour

    def _note_sent(self, sink: AlertSink) -> None:
        with self._lock:
            self._sink_history.setdefault(sink.describe(), []).append(self._clock())

    # -- delivery ---------------------------------------------------------

    @staticmethod
    def _compact_evidence(event: HiveEvent) -> str:
        return " ".join(f"{k}={v:.6g}" for k, v in event.evidence.items())

    def _request_for(self, sink: AlertSink, event: HiveEvent) -> tuple[str, dict]:
        if sink.kind == "ifttt":
            url = f"{sink.url.rstrip('/')}/trigger/{sink.event}/with/key/{sink.key}"
            payload = {
                "value1": event.hive_id,
                "value2": event.kind.value,
                "value3": self._compact_evidence(event),
            }
            return url, payload
        return sink.url, event.as_dict()

    def dispatch(self, event: HiveEvent, sinks: list[AlertSink]) -> list[DeliveryRecord]:
        """Deliver one event to every enabled sink; returns the records.

        A suppressed event gets a single zero-attempt record; failures
        after max retries are recorded, never raised.
        """
        if self._suppressed(event):
            record = DeliveryRecord(event.as_dict(), "suppressed", 0, "deduplicated")
            self._persist(record)
            return [record]

        records = []
        any_delivered = False
        for sink in sinks:
            if not sink.enabled:
                continue
            record = DeliveryRecord(event.as_dict(), sink.describe())
            self._persist(record)  # persisted before the first attempt
            if sink.kind == "log":
                logger.warning(
                    "alert %s %s %s", event.hive_id, event.kind.value,
                    self._compact_evidence(event),
                )
                record.attempts = 1
                record.last_status = "logged"
                record.delivered_at = datetime.now(timezone.utc)
                any_delivered = True
            elif self._rate_limited(sink):
                record.last_status = "rate_limited"
            else:
                self._deliver_http(sink, event, record)
                if record.delivered_at is not None:
                    any_delivered = True
            self._persist(record)
            records.append(record)
        if any_delivered:
            self._mark_delivered(event)
        return records

    def _deliver_http(self, sink: AlertSink, event: HiveEvent, record: DeliveryRecord) -> None:
        url, payload = self._request_for(sink, event)
        delay = BACKOFF_BASE_S
        for attempt in range(1, MAX_ATTEMPTS + 1):
            record.attempts = attempt
            try:
                status = self._post(url, payload, REQUEST_TIMEOUT_S)
            except Exception as exc:
                record.last_status = f"error: {exc.__class__.__name__}"
                status = None
            else:
                record.last_status = str(status)
                if status < 300:
                    record.delivered_at = datetime.now(timezone.utc)
                    self._note_sent(sink)
                    return
                if status < 500:
                    return  # 4xx is terminal
            if attempt < MAX_ATTEMPTS:
                self._sleep(delay)
                delay *= BACKOFF_FACTOR
        logger.warning("sink unavailable after %d attempts: %s", MAX_ATTEMPTS, sink.describe())

    def _persist(self, record: DeliveryRecord) -> None:
        if self._on_record is not None:
            self._on_record(record)


class DispatchWorker:
    """Single consumer thread draining the event queue into the dispatcher."""

    def __init__(
        self,
        queue: EventQueue,
        dispatcher: AlertDispatcher,
        sinks_for: Callable[[str], list[AlertSink]],
        on_result: Optional[Callable[[str, list[DeliveryRecord]], None]] = None,
    ):
        self.queue = queue
        self.dispatcher = dispatcher
        self._sinks_for = sinks_for
        self._on_result = on_result
        self._thread = threading.Thread(target=self._run, name="alert-dispatch", daemon=True)
        self._stop = threading.Event()
        self.processed = 0

    def start(self) -> None:
        self._thread.start()

    def stop(self, timeout: float = 10.0) -> None:
        self._stop.set()
        self.queue.close()
        self._thread.join(timeout)

    def _run(self) -> None:
        while not self._stop.is_set() or len(self.queue):
            event = self.queue.get(timeout=0.2)
            if event is None:
                if self._stop.is_set():
                    break
                continue
            try:
                records = self.dispatcher.dispatch(event, self._sinks_for(event.hive_id))
                self.processed += 1
                if self._on_result is not None:
                    self._on_result(event.hive_id, records)
            except Exception:
                logger.exception("dispatch failed for %s", event.hive_id)
