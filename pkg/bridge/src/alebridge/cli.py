"""Command-line entry point.

  alebridge --game BreakoutNoFrameskip-v4 --connect 127.0.0.1:7000 \
            [--episodes N] [--seed S]

Connects to a listening controller (for example `pctarcade run --env
remote --listen ...`) and plays the named Gymnasium environment over the
wire protocol. Exit status: 0 success, 1 connection or protocol failure,
2 bad configuration or unresolvable environment.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .bridge import BridgeConfig, parse_endpoint, serve


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="alebridge",
        description="Serve a Gymnasium Atari game to a wire-protocol controller")
    parser.add_argument("--game", required=True, metavar="ID",
                        help="environment id, e.g. BreakoutNoFrameskip-v4")
    parser.add_argument("--connect", required=True, metavar="ADDR:PORT",
                        help="controller endpoint to connect to")
    parser.add_argument("--episodes", type=int, default=1, metavar="N")
    parser.add_argument("--seed", type=int, default=None, metavar="S")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        parse_endpoint(args.connect)
        cfg = BridgeConfig(game=args.game, connect=args.connect,
                           episodes=args.episodes, seed=args.seed)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return serve(cfg)


if __name__ == "__main__":
    sys.exit(main())
