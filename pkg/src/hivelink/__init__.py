"""Self-hosted beehive telemetry platform: ingestion, persistence,
streaming detection, gate control, alerting, and a scenario simulator."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    EventKind,
    HiveConfig,
    HiveEvent,
    SensorReading,
    Severity,
    ValidationError,
    severity_for,
    validate_reading,
)
