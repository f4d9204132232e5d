"""Diurnal hive-entrance gate state machine.

The schedule is authoritative: in AUTO the gate is CLOSED during
[close_time, open_time) wrapping midnight and OPEN otherwise, so a shaded
light sensor can never lock the bees in at noon.  The debounced light
signal is a cross-check only; darkness during scheduled-open hours for
more than 30 minutes raises LIGHT_ANOMALY without moving the gate.
Operator overrides dominate until their TTL expires, after which AUTO
resumes at the next step.  Commands are edge-triggered: one per position
change, delivered to the device on its next poll.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Optional

from .model import EventKind, HiveConfig, HiveEvent

DEBOUNCE_S = 5 * 60.0
DARK_ANOMALY_S = 30 * 60.0


class BadTtl(ValueError):
    pass


class GatePosition(str, Enum):
    OPEN = "OPEN"
    CLOSED = "CLOSED"


class GateMode(str, Enum):
    AUTO = "AUTO"
    OVERRIDE_OPEN = "OVERRIDE_OPEN"
    OVERRIDE_CLOSED = "OVERRIDE_CLOSED"


@dataclass(frozen=True)
class GateCommand:
    action: GatePosition
    issued_at: datetime

    def as_dict(self) -> dict:
        return {"command": self.action.value, "issued_at": self.issued_at.isoformat()}


class GateController:
    """Per-hive gate state machine; step() once per reading."""

    def __init__(self, cfg: HiveConfig, tz):
        self.cfg = cfg
        self.tz = tz
        self.position = GatePosition.OPEN
        self.mode = GateMode.AUTO
        self.override_expiry: Optional[float] = None
        self.debounced_light: Optional[bool] = None
        self.last_transition: Optional[float] = None
        self._pending_since: Optional[float] = None
        self._dark_since: Optional[float] = None
        self._dark_fired = False
        self._open_minute = cfg.gate_open_time.hour * 60 + cfg.gate_open_time.minute
        self._close_minute = cfg.gate_close_time.hour * 60 + cfg.gate_close_time.minute

    def _scheduled_closed(self, local: datetime) -> bool:
        minute = local.hour * 60 + local.minute
        return minute >= self._close_minute or minute < self._open_minute

    def _transition(self, desired: GatePosition, ts: datetime) -> GateCommand:
        self.position = desired
        self.last_transition = ts.timestamp()
        return GateCommand(desired, ts)

    def step(
        self, light: bool, ts: datetime
    ) -> tuple[Optional[GateCommand], list[HiveEvent]]:
        """Advance the machine one input; returns (command, events)."""
        epoch = ts.timestamp()
        local = ts.astimezone(self.tz)
        events: list[HiveEvent] = []

        # debounce: the light state flips only after 5 min of stable
        # opposite raw input
        if self.debounced_light is None:
            self.debounced_light = light
        elif light == self.debounced_light:
            self._pending_since = None
        else:
            if self._pending_since is None:
                self._pending_since = epoch
            if epoch - self._pending_since >= DEBOUNCE_S:
                self.debounced_light = light
                self._pending_since = None

        if (
            self.mode is not GateMode.AUTO
            and self.override_expiry is not None
            and epoch >= self.override_expiry
        ):
            self.mode = GateMode.AUTO
            self.override_expiry = None

        if self.mode is GateMode.OVERRIDE_OPEN:
            desired = GatePosition.OPEN
        elif self.mode is GateMode.OVERRIDE_CLOSED:
            desired = GatePosition.CLOSED
        else:
            desired = (
                GatePosition.CLOSED if self._scheduled_closed(local) else GatePosition.OPEN
            )

        command = None
        if desired is not self.position:
            command = self._transition(desired, ts)
            events.append(self._gate_changed_event(ts))

        # sensor cross-check: darkness while the schedule says open
        if not self._scheduled_closed(local) and self.debounced_light is False:
            if self._dark_since is None:
                self._dark_since = epoch
            minutes_dark = (epoch - self._dark_since) / 60.0
            if not self._dark_fired and epoch - self._dark_since > DARK_ANOMALY_S:
                self._dark_fired = True
                events.append(
                    HiveEvent(
                        hive_id=self.cfg.hive_id,
                        kind=EventKind.LIGHT_ANOMALY,
                        window_start=datetime.fromtimestamp(self._dark_since, tz=timezone.utc),
                        window_end=ts,
                        detected_at=ts,
                        evidence={"minutes_dark": minutes_dark},
                    )
                )
        else:
            self._dark_since = None
            self._dark_fired = False

        return command, events

    def apply_override(
        self, action: str, ttl_min: Optional[float], ts: datetime
    ) -> tuple[Optional[GateCommand], list[HiveEvent]]:
        """Apply an operator command: open, close, or auto.

        open/close require a TTL in [1, 1440] minutes; auto clears any
        override and lets the schedule resume at the next step.
        """
        events: list[HiveEvent] = []
        if action == "auto":
            self.mode = GateMode.AUTO
            self.override_expiry = None
            return None, events
        if action not in ("open", "close"):
            raise ValueError(f"unknown gate action: {action!r}")
        if ttl_min is None or not 1 <= ttl_min <= 1440:
            raise BadTtl(f"override ttl must be 1..1440 minutes, got {ttl_min!r}")
        self.mode = GateMode.OVERRIDE_OPEN if action == "open" else GateMode.OVERRIDE_CLOSED
        self.override_expiry = ts.timestamp() + ttl_min * 60.0
        desired = GatePosition.OPEN if action == "open" else GatePosition.CLOSED
        command = None
        if desired is not self.position:
            command = self._transition(desired, ts)
            events.append(self._gate_changed_event(ts))
        return command, events

    def _gate_changed_event(self, ts: datetime) -> HiveEvent:
        return HiveEvent(
            hive_id=self.cfg.hive_id,
            kind=EventKind.GATE_CHANGED,
            window_start=ts,
            window_end=ts,
            detected_at=ts,
            evidence={"open": 1.0 if self.position is GatePosition.OPEN else 0.0},
        )

    def state_dict(self) -> dict:
        return {
            "position": self.position.value,
            "mode": self.mode.value,
            "override_expiry": (
                datetime.fromtimestamp(self.override_expiry, tz=timezone.utc).isoformat()
                if self.override_expiry is not None
                else None
            ),
            "debounced_light": self.debounced_light,
            "last_transition": (
                datetime.fromtimestamp(self.last_transition, tz=timezone.utc).isoformat()
                if self.last_transition is not None
                else None
            ),
        }
