"""Command-line entry points: `hivelink serve` and `hivelink simulate`."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import DEFAULT_BIND, ENV_BIND, ENV_CONFIG, load_config


def _serve(args) -> int:
    import uvicorn

    from .service import create_server

    config_path = args.config or os.environ.get(ENV_CONFIG)
    if not config_path:
        print("serve: --config PATH (or HIVELINK_CONFIG) is required", file=sys.stderr)
        return 2
    config = load_config(config_path)
    bind = args.bind or os.environ.get(ENV_BIND) or config.bind or DEFAULT_BIND
    host, _, port = bind.partition(":")
    server, app = create_server(config)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080), log_level="info")
    finally:
        server.stop()
    return 0


def _simulate(args) -> int:
    from . import simulator

    scenario = simulator.load_scenario(args.scenario)
    if args.seed is not None:
        scenario.seed = args.seed
    trace = simulator.generate(scenario, hive_id=args.hive)
    print(f"generated {len(trace.readings)} readings for {args.hive}")

    if args.target.startswith("http://") or args.target.startswith("https://"):
        stats = simulator.replay_http(
            trace,
            args.target,
            token=args.token,
            speed=args.speed,
            interval_s=scenario.interval_s,
        )
        print(
            f"sent={stats.sent} accepted={stats.accepted} rejected={stats.rejected} "
            f"duration={stats.duration_s:.1f}s commands={len(stats.commands)}"
        )
        for command in stats.commands:
            print(f"  gate command: {command}")
        return 0 if stats.rejected == 0 else 1
    stats = simulator.replay_to_csv(trace, Path(args.target))
    print(f"wrote {stats.accepted} rows to {args.target}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    parser = argparse.ArgumentParser(prog="hivelink")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the telemetry server")
    serve.add_argument("--config", help=f"config file path (or ${ENV_CONFIG})")
    serve.add_argument("--bind", help=f"host:port (or ${ENV_BIND})")
    serve.set_defaults(func=_serve)

    simulate = sub.add_parser("simulate", help="generate and replay a scenario")
    simulate.add_argument("--scenario", required=True, help="scenario file path")
    simulate.add_argument("--target", required=True, help="server base URL or CSV file path")
    simulate.add_argument("--speed", type=float, default=1.0, help="replay speed multiplier")
    simulate.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    simulate.add_argument("--hive", default="hive", help="hive id to replay as")
    simulate.add_argument("--token", default="", help="device token for the target server")
    simulate.set_defaults(func=_simulate)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
