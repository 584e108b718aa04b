"""Frame-to-percept pipeline: binarize, crop, blob-detect, classify, track.

The pipeline turns a raw luminance frame into a PerceptState each tick:

  RawFrame --preprocess--> bool grid --detect_blobs--> [Blob]
           --classify--> (ball, paddle) --track--> PerceptState

All stages are pure functions; the only state is the PerceptState the
caller threads between ticks. Coordinates downstream of preprocess are
cropped-window pixels, x along columns and y along rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .hierarchy import Axis

# Boolean foreground grid produced by preprocess (crop_height x crop_width).
BinaryFrame = np.ndarray


@dataclass
class RawFrame:
    """Row-major 8-bit luminance grid; source frames are height 210, width 160."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self) -> None:
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.shape != (self.height, self.width):
            raise ValueError(
                f"pixel grid {self.pixels.shape} does not match "
                f"height={self.height} width={self.width}")

    @classmethod
    def from_rgb(cls, rgb: np.ndarray) -> RawFrame:
        """Reduce an (h, w, 3) RGB array to luminance by max channel.

        Max keeps any colored object on a black background above the
        binarization threshold regardless of palette.
        """
        rgb = np.asarray(rgb)
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) RGB array, got {rgb.shape}")
        lum = rgb.max(axis=2).astype(np.uint8)
        return cls(width=lum.shape[1], height=lum.shape[0], pixels=lum)


@dataclass(frozen=True)
class CropConfig:
    """Crop window and binarization threshold applied by preprocess."""

    top_row: int = 45
    left_col: int = 14
    crop_height: int = 100
    crop_width: int = 132
    binarize_threshold: int = 40

    def __post_init__(self) -> None:
        if self.crop_height <= 0 or self.crop_width <= 0:
            raise ValueError("crop dimensions must be positive")
        if self.top_row < 0 or self.left_col < 0:
            raise ValueError("crop offsets must be non-negative")
        if not 0 <= self.binarize_threshold <= 255:
            raise ValueError("binarize_threshold must be in [0, 255]")


def preprocess(frame: RawFrame, cfg: CropConfig) -> BinaryFrame:
    """Crop the playing area and binarize: foreground = luminance > threshold."""
    if (cfg.top_row + cfg.crop_height > frame.height
            or cfg.left_col + cfg.crop_width > frame.width):
        raise ValueError(
            f"crop window {cfg.crop_height}x{cfg.crop_width} at "
            f"({cfg.top_row}, {cfg.left_col}) exceeds frame "
            f"{frame.height}x{frame.width}")
    window = frame.pixels[cfg.top_row:cfg.top_row + cfg.crop_height,
                          cfg.left_col:cfg.left_col + cfg.crop_width]
    return window > cfg.binarize_threshold


@dataclass(frozen=True)
class Blob:
    """A 4-connected foreground component with exact pixel-mean centroid."""

    centroid_x: float
    centroid_y: float
    min_row: int
    min_col: int
    max_row: int
    max_col: int
    area: int

    @property
    def height(self) -> int:
        return self.max_row - self.min_row + 1

    @property
    def width(self) -> int:
        return self.max_col - self.min_col + 1


def detect_blobs(bf: BinaryFrame) -> list[Blob]:
    """Extract 4-connected components, largest area first.

    Centroids are exact means of integer pixel coordinates (the sums are
    integers, exactly representable, so results are bit-reproducible).
    Equal areas tie-break on the row-major position of the first pixel.
    """
    mask = np.asarray(bf, dtype=bool)
    if mask.ndim != 2:
        raise ValueError(f"expected a 2-d boolean grid, got shape {mask.shape}")
    labels, count = ndimage.label(mask)
    if count == 0:
        return []
    rows, cols = np.nonzero(labels)
    labs = labels[rows, cols]
    areas = np.bincount(labs)[1:]
    sum_r = np.bincount(labs, weights=rows)[1:]
    sum_c = np.bincount(labs, weights=cols)[1:]
    # np.nonzero scans row-major, so the first occurrence of each label
    # marks its row-major first pixel.
    ordered_labels, first = np.unique(labs, return_index=True)
    first_flat = rows[first] * mask.shape[1] + cols[first]
    boxes = ndimage.find_objects(labels)

    blobs = []
    for i in range(count):
        rs, cs = boxes[i]
        blobs.append((int(-areas[i]), int(first_flat[i]), Blob(
            centroid_x=float(sum_c[i] / areas[i]),
            centroid_y=float(sum_r[i] / areas[i]),
            min_row=int(rs.start), min_col=int(cs.start),
            max_row=int(rs.stop - 1), max_col=int(cs.stop - 1),
            area=int(areas[i]))))
    blobs.sort(key=lambda t: (t[0], t[1]))
    return [b for _, _, b in blobs]


@dataclass(frozen=True)
class GameLayout:
    """Where the paddle lives and what a ball may look like, in crop pixels.

    paddle_zone is (min_row, min_col, max_row, max_col), inclusive. The
    largest blob whose bounding box intersects the zone is the paddle; the
    ball is the largest blob fully outside the zone whose area and aspect
    ratio fit the bounds. hold_ticks is how long the tracker keeps a vanished
    ball alive before flagging it invalid.
    """

    paddle_zone: tuple[int, int, int, int]
    control_axis: Axis
    ball_area_min: int = 1
    ball_area_max: int = 16
    ball_aspect_max: float = 2.5
    hold_ticks: int = 8
    direction_deadband: float = 0.25

    @classmethod
    def for_breakout(cls) -> GameLayout:
        # Bottom paddle: sim renders it at crop rows 95..98.
        return cls(paddle_zone=(94, 0, 99, 131), control_axis=Axis.HORIZONTAL)

    @classmethod
    def for_pong(cls) -> GameLayout:
        # Right-side paddle: sim renders it at crop cols 126..127. The
        # opponent on the far left stays outside both the zone and the
        # ball size bounds, so it is ignored.
        return cls(paddle_zone=(0, 125, 99, 129), control_axis=Axis.VERTICAL)


def _intersects_zone(blob: Blob, zone: tuple[int, int, int, int]) -> bool:
    zr0, zc0, zr1, zc1 = zone
    return (blob.min_row <= zr1 and blob.max_row >= zr0
            and blob.min_col <= zc1 and blob.max_col >= zc0)


def classify(blobs: list[Blob], layout: GameLayout) -> tuple[Blob | None, Blob | None]:
    """Split detected blobs into (ball, paddle); either may be None.

    A ball touching the paddle zone (paddle contact) is deliberately not
    reported; the tracker holds the last estimate through the bounce.
    """
    paddle = None
    for blob in blobs:
        if _intersects_zone(blob, layout.paddle_zone):
            paddle = blob
            break
    ball = None
    for blob in blobs:
        if _intersects_zone(blob, layout.paddle_zone):
            continue
        if not layout.ball_area_min <= blob.area <= layout.ball_area_max:
            continue
        aspect = max(blob.width, blob.height) / min(blob.width, blob.height)
        if aspect > layout.ball_aspect_max:
            continue
        ball = blob
        break
    return ball, paddle


@dataclass(frozen=True)
class PerceptState:
    """Tracked ball and paddle estimates threaded between ticks."""

    ball_x: float
    ball_y: float
    ball_valid: bool
    ball_vx: float
    ball_vy: float
    paddle_axis: float
    paddle_valid: bool
    paddle_direction: int
    stale_ticks: int

    @classmethod
    def initial(cls) -> PerceptState:
        return cls(ball_x=0.0, ball_y=0.0, ball_valid=False,
                   ball_vx=0.0, ball_vy=0.0, paddle_axis=0.0,
                   paddle_valid=False, paddle_direction=0, stale_ticks=0)


def track(prev: PerceptState, ball: Blob | None, paddle: Blob | None,
          layout: GameLayout) -> PerceptState:
    """Fold one tick's detections into the running percept.

    Ball velocity is a finite difference, defined only across two back-to-back
    real detections. A missing ball coasts in place for hold_ticks ticks
    before ball_valid drops. Paddle direction is the sign of its axis motion
    with a small dead band so subpixel jitter reads as stationary.
    """
    if paddle is not None:
        axis = (paddle.centroid_x if layout.control_axis is Axis.HORIZONTAL
                else paddle.centroid_y)
        direction = 0
        if prev.paddle_valid:
            delta = axis - prev.paddle_axis
            if delta > layout.direction_deadband:
                direction = 1
            elif delta < -layout.direction_deadband:
                direction = -1
        paddle_axis, paddle_valid = axis, True
    else:
        paddle_axis, paddle_valid, direction = prev.paddle_axis, False, 0

    if ball is not None:
        vx = vy = 0.0
        if prev.ball_valid and prev.stale_ticks == 0:
            vx = ball.centroid_x - prev.ball_x
            vy = ball.centroid_y - prev.ball_y
        return PerceptState(ball_x=ball.centroid_x, ball_y=ball.centroid_y,
                            ball_valid=True, ball_vx=vx, ball_vy=vy,
                            paddle_axis=paddle_axis, paddle_valid=paddle_valid,
                            paddle_direction=direction, stale_ticks=0)

    stale = prev.stale_ticks + 1
    valid = prev.ball_valid and stale <= layout.hold_ticks
    return PerceptState(ball_x=prev.ball_x, ball_y=prev.ball_y,
                        ball_valid=valid, ball_vx=0.0, ball_vy=0.0,
                        paddle_axis=paddle_axis, paddle_valid=paddle_valid,
                        paddle_direction=direction, stale_ticks=stale)


def write_pgm(frame: RawFrame, path: str) -> None:
    """Write the frame as a binary portable graymap (magic P5, maxval 255)."""
    with open(path, "wb") as fh:
        fh.write(f"P5\n{frame.width} {frame.height}\n255\n".encode("ascii"))
        fh.write(frame.pixels.tobytes())
