"""Helpers to run the service for tests: in-process apps and a real
uvicorn server on an ephemeral port."""

from __future__ import annotations

import socket
import threading
import time
from pathlib import Path

import uvicorn

from hivelink.config import ServerConfig
from hivelink.model import HiveConfig
from hivelink.service import HiveServer, build_app


def make_config(
    data_dir: Path,
    hive_ids=("H1",),
    min_interval: float = 0.0,
    ambient: float | None = 25.5,
    sinks=None,
    queue_capacity: int = 20000,
) -> ServerConfig:
    cfg = ServerConfig(
        data_dir=data_dir,
        display_timezone="Asia/Kolkata",
        operator_token="op-secret",
        read_token="read-secret",
        min_ingest_interval_s=min_interval,
        detection_queue_capacity=queue_capacity,
    )
    for hive_id in hive_ids:
        hive = HiveConfig(hive_id=hive_id, api_token=f"tok-{hive_id}")
        hive.ambient_temp_c = ambient
        if sinks:
            hive.alert_sinks = list(sinks)
        cfg.hives.append(hive.validate())
    return cfg


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class LiveServer:
    """uvicorn in a background thread serving a HiveServer app."""

    def __init__(self, config: ServerConfig, dispatcher=None):
        self.hive_server, self.app = (
            HiveServer(config, dispatcher=dispatcher),
            None,
        )
        self.hive_server.start()
        self.app = build_app(self.hive_server)
        self.port = free_port()
        self.base_url = f"http://127.0.0.1:{self.port}"
        self._uvicorn = uvicorn.Server(
            uvicorn.Config(self.app, host="127.0.0.1", port=self.port, log_level="warning")
        )
        self._thread = threading.Thread(target=self._uvicorn.run, daemon=True)

    def __enter__(self):
        self._thread.start()
        deadline = time.monotonic() + 10
        while not self._uvicorn.started:
            if time.monotonic() > deadline:
                raise RuntimeError("uvicorn failed to start")
            time.sleep(0.01)
        return self

    def __exit__(self, *exc):
        self._uvicorn.should_exit = True
        self._thread.join(timeout=10)
        self.hive_server.stop()
        return False
