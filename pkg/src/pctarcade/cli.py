"""Command-line entry point.

  pctarcade run --config run.ini [--episodes N] [--seed S]
                [--policy pct|random] [--env sim_breakout|sim_pong|remote]
                [--listen ADDR:PORT] [--out DIR] [--dump-frames DIR]

Flags override the config file, which overrides per-game presets. The
remote environment listens for one wire-protocol connection (the game side
connects and starts sending frames). Exit status: 0 on success, 1 when more
than 10% of episodes aborted, 2 on bad configuration.
"""

from __future__ import annotations

import argparse
import configparser
import socket
import sys

from .config import RunConfig, load_config
from .harness import BatchReport, RemoteEnvironment, run_batch


def _parse_endpoint(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"expected ADDR:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def _run_remote(cfg: RunConfig) -> BatchReport:
    host, port = _parse_endpoint(cfg.listen)
    with socket.create_server((host, port)) as server:
        # Report the bound port so --listen HOST:0 stays usable.
        port = server.getsockname()[1]
        print(f"listening on {host}:{port}", flush=True)
        conn, peer = server.accept()
        print(f"game connected from {peer[0]}:{peer[1]}", flush=True)
        with conn:
            stream = conn.makefile("rwb")
            env = RemoteEnvironment(stream)
            # One connection serves every episode back to back.
            return run_batch(cfg, env_factory=lambda i: env)


def _print_report(report: BatchReport) -> None:
    scored = len(report.episodes) - report.aborted
    print(f"episodes: {scored}  aborted: {report.aborted}")
    if report.aborted:
        print(f"warning: {report.aborted} episode(s) aborted and excluded",
              file=sys.stderr)
    s = report.stats
    if s["mean"] is not None:
        print(f"score mean {s['mean']:.2f}  median {s['median']:.2f}  "
              f"best {s['best']:.0f}  worst {s['worst']:.0f}  "
              f"std {s['std']:.2f}")
    print(report.text_histogram(), end="")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="pctarcade",
        description="Training-free perceptual-control agent benchmark")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run an episode batch and report scores")
    runp.add_argument("--config", metavar="FILE",
                      help="INI run configuration")
    runp.add_argument("--episodes", type=int, metavar="N")
    runp.add_argument("--seed", type=int, metavar="S")
    runp.add_argument("--policy", choices=["pct", "random"])
    runp.add_argument("--env", dest="environment",
                      choices=["sim_breakout", "sim_pong", "remote"])
    runp.add_argument("--listen", metavar="ADDR:PORT",
                      help="accept a wire-protocol game here (remote env)")
    runp.add_argument("--out", metavar="DIR",
                      help="write episodes.csv, histogram.csv, summary.json")
    runp.add_argument("--dump-frames", metavar="DIR",
                      help="write episode 0 frames as PGM files")
    runp.add_argument("--workers", type=int, metavar="W",
                      help="parallel worker processes (sim only)")
    runp.add_argument("--max-steps", type=int, metavar="K")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config,
                          environment=args.environment,
                          episodes=args.episodes,
                          seed=args.seed,
                          policy=args.policy,
                          listen=args.listen,
                          out_dir=args.out,
                          dump_frames=args.dump_frames,
                          workers=args.workers,
                          max_steps=args.max_steps)
        if cfg.environment == "remote":
            _parse_endpoint(cfg.listen)
    except (ValueError, OSError, configparser.Error) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        if cfg.environment == "remote":
            report = _run_remote(cfg)
        else:
            report = run_batch(cfg)
    except (ConnectionError, OSError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1

    _print_report(report)
    if cfg.out_dir:
        print(f"reports written to {cfg.out_dir}")
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
