"""Binary frame/action protocol spoken between the harness and a remote game.

Wire format (all integers big-endian):

  FrameMessage:
    [0x50 magic] [u16 width] [u16 height] [u8 flags]
    [i16 reward*100, only if flags bit 1] [width*height luminance bytes]
    flags bit 0: terminal frame; bit 1: reward field present.

  ActionMessage:
    [u8 action] with 0=NOOP, 1=FIRE, 2=RIGHT, 3=LEFT.

The conversation strictly alternates: the environment side sends a frame,
the controller side answers with one action, except that a terminal frame
gets no reply. Rewards ride on the frame as fixed-point hundredths so the
harness can audit scores without a side channel.

Every byte sequence either decodes or raises FramingError carrying the
offset (relative to the message start) where parsing failed; nothing in
this module crashes on arbitrary input. Frame payloads are capped at
1 MiB so a corrupt header cannot demand an absurd allocation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from .hierarchy import Action
from .perception import RawFrame

MAGIC = 0x50
FLAG_TERMINAL = 0x01
FLAG_REWARD = 0x02

_HEADER = struct.Struct(">BHHB")
_REWARD = struct.Struct(">h")

# Upper bound on width*height; real frames are 160*210 = 33,600.
MAX_PIXELS = 1 << 20


class FramingError(Exception):
    """Malformed or truncated message; `offset` locates the failure."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


@dataclass(eq=False)
class FrameMessage:
    """One decoded frame: dimensions, flags, optional reward, pixels."""

    width: int
    height: int
    terminal: bool
    reward: float | None
    pixels: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrameMessage):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and self.terminal == other.terminal
                and self.reward == other.reward
                and np.array_equal(self.pixels, other.pixels))

    def to_raw_frame(self) -> RawFrame:
        return RawFrame(width=self.width, height=self.height,
                        pixels=self.pixels)


def encode_frame(frame: RawFrame, terminal: bool = False,
                 reward: float | None = None) -> bytes:
    """Serialize a frame; reward None omits the reward field entirely."""
    if not 1 <= frame.width <= 0xFFFF or not 1 <= frame.height <= 0xFFFF:
        raise ValueError(f"frame dimensions {frame.width}x{frame.height} "
                         "do not fit the u16 header")
    flags = (FLAG_TERMINAL if terminal else 0)
    parts = []
    if reward is not None:
        centi = round(reward * 100.0)
        if not -0x8000 <= centi <= 0x7FFF:
            raise ValueError(f"reward {reward} overflows fixed-point i16")
        flags |= FLAG_REWARD
        parts.append(_REWARD.pack(centi))
    header = _HEADER.pack(MAGIC, frame.width, frame.height, flags)
    return b"".join([header] + parts + [frame.pixels.tobytes()])


def _parse_header(data: bytes) -> tuple[int, int, bool, bool]:
    if len(data) < _HEADER.size:
        raise FramingError("truncated header", len(data))
    magic, width, height, flags = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FramingError(f"bad magic 0x{magic:02x}", 0)
    if flags & ~(FLAG_TERMINAL | FLAG_REWARD):
        raise FramingError(f"unknown flag bits 0x{flags:02x}", 5)
    if width == 0 or height == 0:
        raise FramingError(f"zero frame dimension {width}x{height}", 1)
    if width * height > MAX_PIXELS:
        raise FramingError(f"frame {width}x{height} exceeds the pixel cap", 1)
    return width, height, bool(flags & FLAG_TERMINAL), bool(flags & FLAG_REWARD)


def decode_frame(data: bytes) -> FrameMessage:
    """Decode exactly one frame message; trailing bytes are an error."""
    width, height, terminal, has_reward = _parse_header(data)
    pos = _HEADER.size
    reward = None
    if has_reward:
        if len(data) < pos + _REWARD.size:
            raise FramingError("truncated reward field", len(data))
        reward = _REWARD.unpack_from(data, pos)[0] / 100.0
        pos += _REWARD.size
    expected = pos + width * height
    if len(data) < expected:
        raise FramingError("truncated pixel payload", len(data))
    if len(data) > expected:
        raise FramingError("trailing bytes after frame", expected)
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height,
                           offset=pos).reshape(height, width).copy()
    return FrameMessage(width=width, height=height, terminal=terminal,
                        reward=reward, pixels=pixels)


def _read_exact(stream: BinaryIO, n: int, base: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            raise FramingError("stream ended mid-message", base + len(buf))
        buf.extend(chunk)
    return bytes(buf)


def write_frame(stream: BinaryIO, frame: RawFrame, terminal: bool = False,
                reward: float | None = None) -> None:
    stream.write(encode_frame(frame, terminal=terminal, reward=reward))
    stream.flush()


def read_frame(stream: BinaryIO) -> FrameMessage | None:
    """Read one frame; returns None on clean end-of-stream between messages."""
    first = stream.read(1)
    if first == b"":
        return None
    head = first + _read_exact(stream, _HEADER.size - 1, 1)
    width, height, terminal, has_reward = _parse_header(head)
    pos = _HEADER.size
    reward = None
    if has_reward:
        raw = _read_exact(stream, _REWARD.size, pos)
        reward = _REWARD.unpack(raw)[0] / 100.0
        pos += _REWARD.size
    payload = _read_exact(stream, width * height, pos)
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()
    return FrameMessage(width=width, height=height, terminal=terminal,
                        reward=reward, pixels=pixels)


def encode_action(action: Action) -> bytes:
    return bytes([Action(action).value])


def decode_action(data: bytes) -> Action:
    if len(data) < 1:
        raise FramingError("empty action message", 0)
    if len(data) > 1:
        raise FramingError("trailing bytes after action", 1)
    value = data[0]
    if value > 3:
        raise FramingError(f"unknown action byte {value}", 0)
    return Action(value)


def write_action(stream: BinaryIO, action: Action) -> None:
    stream.write(encode_action(action))
    stream.flush()


def read_action(stream: BinaryIO) -> Action:
    return decode_action(_read_exact(stream, 1, 0))
