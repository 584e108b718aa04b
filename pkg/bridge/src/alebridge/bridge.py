"""Blocking serve loop: environment frames out, controller actions in.

The bridge owns no control logic. Per step it converts the environment's
RGB observation to luminance, ships it with the step reward and terminal
flag, waits for one action byte, and applies it verbatim; Atari's minimal
action sets for these games list NOOP, FIRE, RIGHT, LEFT in exactly the
wire protocol's byte order. On a terminal step it resets and keeps going
until the configured episode count.
"""

from __future__ import annotations

import logging
import socket
from dataclasses import dataclass
from typing import BinaryIO, Callable

from .protocol import ProtocolError, read_action, to_luminance, write_frame

log = logging.getLogger("alebridge")


@dataclass(frozen=True)
class BridgeConfig:
    """What to run and where to send it."""

    game: str
    connect: str
    episodes: int = 1
    seed: int | None = None

    def __post_init__(self) -> None:
        if not self.game:
            raise ValueError("game id must be non-empty")
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")

    @property
    def fixed_frameskip(self) -> bool:
        """Whether the chosen environment variant steps a fixed frame count."""
        return "NoFrameskip" in self.game or "Deterministic" in self.game


def parse_endpoint(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"expected ADDR:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def make_gym_environment(cfg: BridgeConfig):
    """Resolve the game id in the Gymnasium registry. Imported lazily so
    the bridge is testable where gymnasium is not installed."""
    import gymnasium

    return gymnasium.make(cfg.game)


def serve(cfg: BridgeConfig,
          env_factory: Callable[[BridgeConfig], object] | None = None,
          stream: BinaryIO | None = None) -> int:
    """Bridge one connection for cfg.episodes episodes.

    Returns a process exit status: 0 success, 1 connection or protocol
    failure, 2 environment failure. A caller-supplied stream skips the
    TCP connect (used by tests and pipe transports).
    """
    factory = env_factory if env_factory is not None else make_gym_environment
    try:
        env = factory(cfg)
    except Exception as exc:
        log.error("environment %r failed to load: %s", cfg.game, exc)
        return 2

    sock = None
    try:
        if stream is None:
            host, port = parse_endpoint(cfg.connect)
            sock = socket.create_connection((host, port))
            stream = sock.makefile("rwb")
        log.info("bridging %s (fixed_frameskip=%s) for %d episode(s)",
                 cfg.game, cfg.fixed_frameskip, cfg.episodes)
        for episode in range(cfg.episodes):
            seed = None if cfg.seed is None else cfg.seed + episode
            obs, _ = env.reset(seed=seed)
            write_frame(stream, to_luminance(obs))
            terminal = False
            while not terminal:
                action = read_action(stream)
                obs, reward, terminated, truncated, _ = env.step(action)
                terminal = bool(terminated or truncated)
                write_frame(stream, to_luminance(obs), terminal=terminal,
                            reward=float(reward))
            log.info("episode %d finished", episode)
        return 0
    except ProtocolError as exc:
        log.error("protocol violation: %s", exc)
        return 1
    except (ConnectionError, OSError, ValueError) as exc:
        log.error("bridge failed: %s", exc)
        return 1
    finally:
        try:
            env.close()
        except Exception:
            pass
        if stream is not None:
            try:
                stream.close()
            except OSError:
                pass
        if sock is not None:
            sock.close()
