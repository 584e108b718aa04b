"""The bridge's half of the frame/action wire protocol.

Byte layout (big-endian integers):

  frame:   [0x50] [u16 width] [u16 height] [u8 flags]
           [i16 reward*100, only when flags bit 1] [width*height pixels]
           flags bit 0 = terminal, bit 1 = reward field present
  action:  [u8] with 0=NOOP, 1=FIRE, 2=RIGHT, 3=LEFT

The bridge only ever sends frames and receives actions, so that is all
this module implements; the controller side owns the other direction.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

MAGIC = 0x50
FLAG_TERMINAL = 0x01
FLAG_REWARD = 0x02
ACTION_COUNT = 4

_HEADER = struct.Struct(">BHHB")
_REWARD = struct.Struct(">h")


class ProtocolError(Exception):
    """The peer broke the frame/action alternation or sent garbage."""


def to_luminance(obs: np.ndarray) -> np.ndarray:
    """Collapse an RGB observation to 8-bit luminance by channel maximum.

    Grayscale observations pass through. Max keeps colored sprites on a
    black background visible no matter the palette.
    """
    obs = np.asarray(obs)
    if obs.ndim == 3 and obs.shape[2] == 3:
        return obs.max(axis=2).astype(np.uint8)
    if obs.ndim == 2:
        return obs.astype(np.uint8)
    raise ValueError(f"expected (h, w, 3) or (h, w) observation, got {obs.shape}")


def encode_frame(pixels: np.ndarray, terminal: bool = False,
                 reward: float | None = None) -> bytes:
    """Serialize a luminance grid; reward None omits the reward field."""
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    if pixels.ndim != 2:
        raise ValueError(f"expected a 2-d pixel grid, got shape {pixels.shape}")
    height, width = pixels.shape
    if not 1 <= width <= 0xFFFF or not 1 <= height <= 0xFFFF:
        raise ValueError(f"frame dimensions {width}x{height} do not fit the header")
    flags = FLAG_TERMINAL if terminal else 0
    parts = []
    if reward is not None:
        centi = round(reward * 100.0)
        if not -0x8000 <= centi <= 0x7FFF:
            raise ValueError(f"reward {reward} overflows fixed-point i16")
        flags |= FLAG_REWARD
        parts.append(_REWARD.pack(centi))
    header = _HEADER.pack(MAGIC, width, height, flags)
    return b"".join([header] + parts + [pixels.tobytes()])


def write_frame(stream: BinaryIO, pixels: np.ndarray, terminal: bool = False,
                reward: float | None = None) -> None:
    stream.write(encode_frame(pixels, terminal=terminal, reward=reward))
    stream.flush()


def read_action(stream: BinaryIO) -> int:
    """Block for the controller's one-byte reply to the last frame."""
    data = stream.read(1)
    if data == b"":
        raise ProtocolError("controller closed the connection mid-episode")
    value = data[0]
    if value >= ACTION_COUNT:
        raise ProtocolError(f"unknown action byte {value}")
    return value
