"""Preprocessing, blob detection against a flood-fill oracle, classify, track."""

from __future__ import annotations

import numpy as np
import pytest

from pctarcade.hierarchy import Axis
from pctarcade.perception import (
    Blob,
    CropConfig,
    GameLayout,
    PerceptState,
    RawFrame,
    classify,
    detect_blobs,
    preprocess,
    track,
    write_pgm,
)

import oracles


def _blank_frame(fill: int = 0) -> RawFrame:
    pixels = np.full((210, 160), fill, dtype=np.uint8)
    return RawFrame(width=160, height=210, pixels=pixels)


def _blob(min_row: int, min_col: int, max_row: int, max_col: int,
          area: int | None = None) -> Blob:
    h = max_row - min_row + 1
    w = max_col - min_col + 1
    return Blob(centroid_x=(min_col + max_col) / 2.0,
                centroid_y=(min_row + max_row) / 2.0,
                min_row=min_row, min_col=min_col,
                max_row=max_row, max_col=max_col,
                area=area if area is not None else h * w)


def test_preprocess_crops_to_playing_window() -> None:
    bf = preprocess(_blank_frame(), CropConfig())
    assert bf.shape == (100, 132)
    assert bf.dtype == np.bool_
    assert not bf.any()


def test_preprocess_threshold_is_strict() -> None:
    cfg = CropConfig()
    frame = _blank_frame()
    frame.pixels[45, 14] = cfg.binarize_threshold
    assert not preprocess(frame, cfg).any()
    frame.pixels[45, 14] = cfg.binarize_threshold + 1
    bf = preprocess(frame, cfg)
    assert bf[0, 0]
    assert bf.sum() == 1


def test_preprocess_rejects_undersized_frames() -> None:
    small = RawFrame(width=60, height=60,
                     pixels=np.zeros((60, 60), dtype=np.uint8))
    with pytest.raises(ValueError):
        preprocess(small, CropConfig())


def test_preprocess_roundtrips_a_rendered_binary_grid() -> None:
    rng = np.random.default_rng(42)
    cfg = CropConfig()
    grid = rng.random((cfg.crop_height, cfg.crop_width)) < 0.3
    frame = _blank_frame()
    frame.pixels[cfg.top_row:cfg.top_row + cfg.crop_height,
                 cfg.left_col:cfg.left_col + cfg.crop_width] = grid * 255
    assert np.array_equal(preprocess(frame, cfg), grid)


def test_crop_config_validation() -> None:
    with pytest.raises(ValueError):
        CropConfig(crop_height=0)
    with pytest.raises(ValueError):
        CropConfig(top_row=-1)
    with pytest.raises(ValueError):
        CropConfig(binarize_threshold=256)


def test_raw_frame_shape_validation() -> None:
    with pytest.raises(ValueError):
        RawFrame(width=4, height=4, pixels=np.zeros((4, 5), dtype=np.uint8))


def test_from_rgb_takes_channel_maximum() -> None:
    rgb = np.zeros((5, 6, 3), dtype=np.uint8)
    rgb[2, 3] = (10, 200, 30)
    frame = RawFrame.from_rgb(rgb)
    assert frame.height == 5 and frame.width == 6
    assert frame.pixels[2, 3] == 200
    with pytest.raises(ValueError):
        RawFrame.from_rgb(np.zeros((5, 6), dtype=np.uint8))


def test_blob_rectangle_centroid() -> None:
    grid = np.zeros((40, 40), dtype=bool)
    grid[10:12, 20:23] = True
    blobs = detect_blobs(grid)
    assert len(blobs) == 1
    blob = blobs[0]
    assert blob.area == 6
    assert blob.centroid_x == 21.0
    assert blob.centroid_y == 10.5
    assert (blob.min_row, blob.min_col, blob.max_row, blob.max_col) == (10, 20, 11, 22)
    assert blob.width == 3 and blob.height == 2


def test_blob_order_largest_first_then_row_major() -> None:
    grid = np.zeros((20, 20), dtype=bool)
    grid[15, 0:4] = True
    grid[2, 10:12] = True
    grid[2, 2:4] = True
    blobs = detect_blobs(grid)
    assert [b.area for b in blobs] == [4, 2, 2]
    assert blobs[1].min_col == 2
    assert blobs[2].min_col == 10


def test_detect_blobs_empty_grid() -> None:
    assert detect_blobs(np.zeros((10, 10), dtype=bool)) == []


def test_detect_blobs_rejects_non_2d_input() -> None:
    with pytest.raises(ValueError):
        detect_blobs(np.zeros((4, 4, 2), dtype=bool))


def test_diagonal_pixels_are_separate_blobs() -> None:
    grid = np.zeros((6, 6), dtype=bool)
    grid[1, 1] = True
    grid[2, 2] = True
    assert len(detect_blobs(grid)) == 2


def test_detect_blobs_matches_flood_fill_oracle() -> None:
    rng = np.random.default_rng(1234)
    for _ in range(300):
        h = int(rng.integers(1, 65))
        w = int(rng.integers(1, 65))
        density = float(rng.uniform(0.05, 0.6))
        grid = rng.random((h, w)) < density
        got = detect_blobs(grid)
        want = oracles.flood_fill_blobs(grid.tolist())
        assert len(got) == len(want)
        for blob, ref in zip(got, want):
            assert blob.area == ref["area"]
            assert blob.centroid_x == ref["centroid_x"]
            assert blob.centroid_y == ref["centroid_y"]
            assert blob.min_row == ref["min_row"]
            assert blob.min_col == ref["min_col"]
            assert blob.max_row == ref["max_row"]
            assert blob.max_col == ref["max_col"]


def test_blob_areas_conserve_foreground_count() -> None:
    rng = np.random.default_rng(7)
    for _ in range(50):
        grid = rng.random((48, 48)) < 0.4
        blobs = detect_blobs(grid)
        assert sum(b.area for b in blobs) == int(grid.sum())


def test_blob_translation_equivariance() -> None:
    # Equivariance is exact on the integer pixel sums: shifting every pixel
    # by (dr, dc) adds area * d to each sum. The float centroids, each a
    # single correctly-rounded division, then agree to within one ulp.
    rng = np.random.default_rng(99)
    for _ in range(100):
        pattern = rng.random((8, 8)) < 0.5
        if not pattern.any():
            continue
        grid = np.zeros((64, 64), dtype=bool)
        grid[5:13, 5:13] = pattern
        dr = int(rng.integers(0, 40))
        dc = int(rng.integers(0, 40))
        shifted = np.zeros((64, 64), dtype=bool)
        shifted[5 + dr:13 + dr, 5 + dc:13 + dc] = pattern
        base = oracles.flood_fill_blobs(grid.tolist())
        ref = oracles.flood_fill_blobs(shifted.tolist())
        moved = detect_blobs(shifted)
        assert len(base) == len(ref) == len(moved)
        for a, b, blob in zip(base, ref, moved):
            assert b["area"] == a["area"]
            assert b["sum_col"] == a["sum_col"] + a["area"] * dc
            assert b["sum_row"] == a["sum_row"] + a["area"] * dr
            assert blob.centroid_x == b["centroid_x"]
            assert blob.centroid_y == b["centroid_y"]
            assert abs(blob.centroid_x - (a["centroid_x"] + dc)) < 1e-12
            assert abs(blob.centroid_y - (a["centroid_y"] + dr)) < 1e-12


def test_layout_presets() -> None:
    breakout = GameLayout.for_breakout()
    assert breakout.control_axis is Axis.HORIZONTAL
    assert breakout.paddle_zone == (94, 0, 99, 131)
    pong = GameLayout.for_pong()
    assert pong.control_axis is Axis.VERTICAL
    assert pong.paddle_zone == (0, 125, 99, 129)


def test_classify_splits_ball_and_paddle() -> None:
    layout = GameLayout.for_breakout()
    paddle = _blob(95, 60, 98, 75)
    ball = _blob(40, 20, 41, 21)
    ball_got, paddle_got = classify([paddle, ball], layout)
    assert paddle_got is paddle
    assert ball_got is ball


def test_classify_ball_touching_paddle_zone_is_withheld() -> None:
    layout = GameLayout.for_breakout()
    paddle = _blob(95, 60, 98, 75)
    ball = _blob(93, 20, 94, 21)
    ball_got, paddle_got = classify([paddle, ball], layout)
    assert paddle_got is paddle
    assert ball_got is None


def test_classify_largest_zone_blob_wins_paddle() -> None:
    layout = GameLayout.for_breakout()
    debris = _blob(95, 10, 96, 11)
    paddle = _blob(95, 60, 98, 75)
    ball_got, paddle_got = classify([paddle, debris], layout)
    assert paddle_got is paddle
    assert ball_got is None


def test_classify_rejects_oversized_or_elongated_ball() -> None:
    layout = GameLayout.for_breakout()
    wall = _blob(10, 20, 13, 24)
    assert wall.area == 20
    line = _blob(30, 40, 30, 44)
    ball_got, _ = classify([wall, line], layout)
    assert ball_got is None


def test_classify_no_blobs() -> None:
    assert classify([], GameLayout.for_breakout()) == (None, None)


def test_track_velocity_is_finite_difference() -> None:
    layout = GameLayout.for_breakout()
    state = track(PerceptState.initial(), _blob(40, 50, 41, 51), None, layout)
    assert state.ball_valid
    assert state.ball_vx == 0.0 and state.ball_vy == 0.0
    state = track(state, _blob(38, 52, 39, 53), None, layout)
    assert state.ball_vx == 2.0
    assert state.ball_vy == -2.0


def test_track_hold_window_then_invalid() -> None:
    layout = GameLayout.for_breakout()
    state = track(PerceptState.initial(), _blob(40, 50, 41, 51), None, layout)
    for tick in range(1, layout.hold_ticks + 1):
        state = track(state, None, None, layout)
        assert state.ball_valid
        assert state.stale_ticks == tick
        assert state.ball_x == 50.5 and state.ball_y == 40.5
        assert state.ball_vx == 0.0 and state.ball_vy == 0.0
    state = track(state, None, None, layout)
    assert not state.ball_valid


def test_track_velocity_suppressed_after_gap() -> None:
    layout = GameLayout.for_breakout()
    state = track(PerceptState.initial(), _blob(40, 50, 41, 51), None, layout)
    state = track(state, None, None, layout)
    state = track(state, _blob(36, 56, 37, 57), None, layout)
    assert state.ball_valid
    assert state.ball_vx == 0.0 and state.ball_vy == 0.0
    assert state.stale_ticks == 0


def test_track_paddle_direction_uses_deadband() -> None:
    layout = GameLayout.for_breakout()
    state = track(PerceptState.initial(), None, _blob(95, 60, 98, 75), layout)
    assert state.paddle_valid
    assert state.paddle_direction == 0
    moved = track(state, None, _blob(95, 63, 98, 78), layout)
    assert moved.paddle_direction == 1
    jitter = track(state, None, _blob(95, 60, 98, 75), layout)
    assert jitter.paddle_direction == 0
    back = track(state, None, _blob(95, 57, 98, 72), layout)
    assert back.paddle_direction == -1


def test_track_paddle_absent_holds_axis() -> None:
    layout = GameLayout.for_breakout()
    state = track(PerceptState.initial(), None, _blob(95, 60, 98, 75), layout)
    lost = track(state, None, None, layout)
    assert not lost.paddle_valid
    assert lost.paddle_axis == state.paddle_axis
    assert lost.paddle_direction == 0


def test_track_vertical_axis_reads_rows() -> None:
    layout = GameLayout.for_pong()
    state = track(PerceptState.initial(), None, _blob(60, 126, 69, 127), layout)
    assert state.paddle_axis == 64.5


def test_write_pgm(tmp_path) -> None:
    frame = _blank_frame()
    frame.pixels[0, 0] = 17
    path = tmp_path / "frame.pgm"
    write_pgm(frame, str(path))
    data = path.read_bytes()
    assert data.startswith(b"P5\n160 210\n255\n")
    assert len(data) == len(b"P5\n160 210\n255\n") + 210 * 160
    assert data[len(b"P5\n160 210\n255\n")] == 17
