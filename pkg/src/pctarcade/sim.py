"""Deterministic headless paddle-game simulator with 210x160 rendering.

Two games share one physics core: a brick-breaking game with a bottom
paddle (horizontal control) and a two-paddle rally game against a capped
ball-following opponent (vertical control). Physics run in fixed-order
float arithmetic; the only randomness is the serve position and angle,
drawn from a generator seeded at reset, so (seed, action sequence) fully
determines every state bit-for-bit.

Geometry mirrors the source frames the perception pipeline expects: the
playing area is the 100x132 window at rows 45..144, cols 14..145 of a
210x160 frame. Sprites are drawn as solid bright rectangles anchored at
floor(center - size/2 + 0.5), which keeps every rendered centroid within
half a pixel of the physics position.

The ball is served only by FIRE (in both games), so a controller must
actively relaunch after every lost life or point.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass

import numpy as np

from .hierarchy import Action
from .perception import RawFrame

# Playing-field window (absolute frame coordinates, inclusive).
FIELD_TOP = 45.0
FIELD_BOTTOM = 144.0
FIELD_LEFT = 14.0
FIELD_RIGHT = 145.0

# Ball: 2x2 sprite, center-based physics, reflected one pixel inside the
# field so the sprite never leaves the window.
BALL_SIZE = 2
BALL_ROW_MIN = FIELD_TOP + 1.0
BALL_ROW_MAX = FIELD_BOTTOM - 1.0
BALL_COL_MIN = FIELD_LEFT + 1.0
BALL_COL_MAX = FIELD_RIGHT - 1.0

# Brick wall (brick-game only): 6 rows x 18 cols of 7x4 bricks.
BRICK_TOP = 57
BRICK_LEFT = 17
BRICK_W = 7
BRICK_H = 4

# Paddles. The bottom paddle occupies rows 140..143; the side paddles
# occupy two-column strips near each vertical edge.
BREAKOUT_PADDLE_TOP = 140
BREAKOUT_LOSS_ROW = 145.0
BREAKOUT_SERVE_ROW = 85.0
BREAKOUT_SERVE_COL_MIN = 44.0
BREAKOUT_SERVE_COL_MAX = 115.0

PONG_AGENT_COL = 140          # leftmost column of the right paddle
PONG_OPPONENT_COL = 18        # leftmost column of the left paddle
PONG_PADDLE_W = 2
PONG_SERVE_COL = 80.0
PONG_SERVE_ROW_MIN = 60.0
PONG_SERVE_ROW_MAX = 129.0

# Luminance values for rendered sprites; all exceed the default threshold.
BALL_SHADE = 255
PADDLE_SHADE = 200
BRICK_SHADE = 180


class Game(enum.Enum):
    BREAKOUT = "breakout"
    PONG = "pong"


class TerminalStepError(RuntimeError):
    """sim_step was called on a state that already finished."""


@dataclass(frozen=True)
class SimConfig:
    """Physics constants; invalid values are rejected naming the field."""

    game: Game
    field_width: int = 160
    field_height: int = 210
    paddle_span: int = 16          # paddle length along the control axis
    paddle_thickness: int = 4
    paddle_speed: float = 2.0      # px moved per pressed tick
    ball_speed: float = 1.0        # px per physics tick
    brick_rows: int = 6
    brick_cols: int = 18
    brick_values: tuple[int, ...] = (7, 7, 4, 4, 1, 1)
    opponent_speed_cap: float = 0.45
    lives: int = 5
    max_points: int = 21
    frameskip: int = 4
    seed: int = 0
    serve_angle_max_deg: float = 50.0
    bounce_lateral_max: float = 0.6  # |off-axis velocity| cap after a paddle hit
    bounce_min_ratio: float = 0.0    # deflection floor; keeps rallies finite

    def __post_init__(self) -> None:
        for name in ("field_width", "field_height", "paddle_span",
                     "paddle_thickness", "lives", "max_points"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("paddle_speed", "ball_speed"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.ball_speed > 2.0:
            raise ValueError("ball_speed above 2 px/tick can tunnel through sprites")
        if self.frameskip < 1:
            raise ValueError("frameskip must be >= 1")
        if self.opponent_speed_cap < 0.0:
            raise ValueError("opponent_speed_cap must be >= 0")
        if not 0.0 < self.bounce_lateral_max < 1.0:
            raise ValueError("bounce_lateral_max must be in (0, 1)")
        if not 0.0 <= self.bounce_min_ratio <= 1.0:
            raise ValueError("bounce_min_ratio must be in [0, 1]")
        if not 0.0 <= self.serve_angle_max_deg < 90.0:
            raise ValueError("serve_angle_max_deg must be in [0, 90)")
        if self.game is Game.BREAKOUT and len(self.brick_values) != self.brick_rows:
            raise ValueError("brick_values must list one value per brick row")

    @classmethod
    def breakout(cls, seed: int = 0, frameskip: int = 4) -> SimConfig:
        return cls(game=Game.BREAKOUT, seed=seed, frameskip=frameskip)

    @classmethod
    def pong(cls, seed: int = 0, frameskip: int = 4) -> SimConfig:
        # Wider, faster paddle and a 40-degree serve cone keep every rally
        # trackable; the opponent cap makes it beatable but not trivially.
        # The deflection floor forces every return off-axis faster than the
        # opponent cap, so rallies resolve instead of flattening out.
        return cls(game=Game.PONG, seed=seed, frameskip=frameskip,
                   paddle_span=20, paddle_speed=2.5,
                   serve_angle_max_deg=40.0, bounce_lateral_max=0.75,
                   bounce_min_ratio=0.75)


def _paddle_axis_bounds(cfg: SimConfig) -> tuple[float, float]:
    half = cfg.paddle_span / 2.0
    if cfg.game is Game.BREAKOUT:
        return FIELD_LEFT + half, FIELD_RIGHT - half
    return FIELD_TOP + half, FIELD_BOTTOM - half


@dataclass(eq=False)
class SimState:
    """Full game state; value-compare via snapshot()."""

    ball_x: float
    ball_y: float
    ball_vx: float
    ball_vy: float
    ball_in_play: bool
    paddle_axis: float
    opponent_axis: float
    bricks: np.ndarray          # alive-mask, (brick_rows, brick_cols)
    lives: int
    score: int
    points_for: int
    points_against: int
    tick: int
    terminal: bool
    rng: random.Random

    def snapshot(self) -> tuple:
        """Comparable value tuple covering every bit of state."""
        return (self.ball_x, self.ball_y, self.ball_vx, self.ball_vy,
                self.ball_in_play, self.paddle_axis, self.opponent_axis,
                self.bricks.tobytes(), self.lives, self.score,
                self.points_for, self.points_against, self.tick,
                self.terminal, self.rng.getstate())


@dataclass(frozen=True)
class StepOutcome:
    reward: float
    terminal: bool
    events: tuple[str, ...]


def reset(cfg: SimConfig) -> SimState:
    """Fresh state: full wall, zero score, ball waiting for FIRE."""
    if cfg.game is Game.BREAKOUT:
        bricks = np.ones((cfg.brick_rows, cfg.brick_cols), dtype=bool)
        paddle = (FIELD_LEFT + FIELD_RIGHT) / 2.0
        opponent = 0.0
    else:
        bricks = np.zeros((0, 0), dtype=bool)
        paddle = (FIELD_TOP + FIELD_BOTTOM) / 2.0
        opponent = paddle
    return SimState(ball_x=0.0, ball_y=0.0, ball_vx=0.0, ball_vy=0.0,
                    ball_in_play=False, paddle_axis=paddle,
                    opponent_axis=opponent, bricks=bricks, lives=cfg.lives,
                    score=0, points_for=0, points_against=0, tick=0,
                    terminal=False, rng=random.Random(cfg.seed))


def _serve(state: SimState, cfg: SimConfig) -> None:
    angle = math.radians(state.rng.uniform(-cfg.serve_angle_max_deg,
                                           cfg.serve_angle_max_deg))
    if cfg.game is Game.BREAKOUT:
        state.ball_x = state.rng.uniform(BREAKOUT_SERVE_COL_MIN,
                                         BREAKOUT_SERVE_COL_MAX)
        state.ball_y = BREAKOUT_SERVE_ROW
        state.ball_vx = cfg.ball_speed * math.sin(angle)
        state.ball_vy = cfg.ball_speed * math.cos(angle)
    else:
        state.ball_x = PONG_SERVE_COL
        state.ball_y = state.rng.uniform(PONG_SERVE_ROW_MIN, PONG_SERVE_ROW_MAX)
        # Serves alternate sides so neither player receives every serve.
        toward_agent = (state.points_for + state.points_against) % 2 == 0
        direction = 1.0 if toward_agent else -1.0
        state.ball_vx = direction * cfg.ball_speed * math.cos(angle)
        state.ball_vy = cfg.ball_speed * math.sin(angle)
    state.ball_in_play = True


def _bounce_off_paddle(state: SimState, cfg: SimConfig, paddle_axis: float,
                       off_axis: float, direction: float) -> None:
    """Elastic paddle bounce: contact offset sets the off-axis velocity.

    direction is the sign of the outgoing on-axis velocity. Speed magnitude
    is preserved exactly by deriving the on-axis component from the off-axis
    one.
    """
    half = cfg.paddle_span / 2.0
    ratio = (off_axis - paddle_axis) / half
    ratio = max(-1.0, min(1.0, ratio))
    if abs(ratio) < cfg.bounce_min_ratio:
        # Dead-center hits deflect by the floor amount (positive side).
        ratio = cfg.bounce_min_ratio if ratio >= 0.0 else -cfg.bounce_min_ratio
    lateral = ratio * cfg.bounce_lateral_max * cfg.ball_speed
    axial = direction * math.sqrt(cfg.ball_speed * cfg.ball_speed
                                  - lateral * lateral)
    if cfg.game is Game.BREAKOUT:
        state.ball_vx, state.ball_vy = lateral, axial
    else:
        state.ball_vy, state.ball_vx = lateral, axial


def _tick_breakout(state: SimState, cfg: SimConfig, action: Action,
                   events: list[str]) -> float:
    reward = 0.0
    lo, hi = _paddle_axis_bounds(cfg)
    if action is Action.RIGHT:
        state.paddle_axis = min(hi, state.paddle_axis + cfg.paddle_speed)
    elif action is Action.LEFT:
        state.paddle_axis = max(lo, state.paddle_axis - cfg.paddle_speed)
    elif action is Action.FIRE and not state.ball_in_play:
        _serve(state, cfg)

    if not state.ball_in_play:
        return reward
    state.ball_x += state.ball_vx
    state.ball_y += state.ball_vy

    if state.ball_x < BALL_COL_MIN:
        state.ball_x = 2.0 * BALL_COL_MIN - state.ball_x
        state.ball_vx = -state.ball_vx
        events.append("wall_bounce")
    elif state.ball_x > BALL_COL_MAX:
        state.ball_x = 2.0 * BALL_COL_MAX - state.ball_x
        state.ball_vx = -state.ball_vx
        events.append("wall_bounce")
    if state.ball_y < BALL_ROW_MIN:
        state.ball_y = 2.0 * BALL_ROW_MIN - state.ball_y
        state.ball_vy = -state.ball_vy
        events.append("wall_bounce")

    # Brick contact: the ball center indexes the grid cell directly.
    row = int((state.ball_y - BRICK_TOP) // BRICK_H)
    col = int((state.ball_x - BRICK_LEFT) // BRICK_W)
    if (0 <= row < cfg.brick_rows and 0 <= col < cfg.brick_cols
            and state.bricks[row, col]):
        state.bricks[row, col] = False
        value = cfg.brick_values[row]
        state.score += value
        reward += float(value)
        state.ball_vy = -state.ball_vy
        events.append("brick_hit")
        if not state.bricks.any():
            state.terminal = True
            state.ball_in_play = False
            return reward

    half = cfg.paddle_span / 2.0
    if (state.ball_vy > 0.0
            and BREAKOUT_PADDLE_TOP - 1.0 <= state.ball_y <= BREAKOUT_LOSS_ROW
            and abs(state.ball_x - state.paddle_axis) <= half + 1.0):
        _bounce_off_paddle(state, cfg, state.paddle_axis, state.ball_x, -1.0)
        state.ball_y = BREAKOUT_PADDLE_TOP - 1.0
        events.append("paddle_bounce")
    elif state.ball_y > BREAKOUT_LOSS_ROW:
        state.lives -= 1
        reward -= 1.0
        state.ball_in_play = False
        events.append("life_lost")
        if state.lives <= 0:
            state.terminal = True
    return reward


def _tick_pong(state: SimState, cfg: SimConfig, action: Action,
               events: list[str]) -> float:
    reward = 0.0
    lo, hi = _paddle_axis_bounds(cfg)
    # RIGHT moves the side paddle up (toward smaller rows), LEFT down.
    if action is Action.RIGHT:
        state.paddle_axis = max(lo, state.paddle_axis - cfg.paddle_speed)
    elif action is Action.LEFT:
        state.paddle_axis = min(hi, state.paddle_axis + cfg.paddle_speed)
    elif action is Action.FIRE and not state.ball_in_play:
        _serve(state, cfg)

    if not state.ball_in_play:
        return reward
    # Opponent chases the ball row under its speed cap.
    gap = state.ball_y - state.opponent_axis
    step = max(-cfg.opponent_speed_cap, min(cfg.opponent_speed_cap, gap))
    state.opponent_axis = max(lo, min(hi, state.opponent_axis + step))

    state.ball_x += state.ball_vx
    state.ball_y += state.ball_vy

    if state.ball_y < BALL_ROW_MIN:
        state.ball_y = 2.0 * BALL_ROW_MIN - state.ball_y
        state.ball_vy = -state.ball_vy
        events.append("wall_bounce")
    elif state.ball_y > BALL_ROW_MAX:
        state.ball_y = 2.0 * BALL_ROW_MAX - state.ball_y
        state.ball_vy = -state.ball_vy
        events.append("wall_bounce")

    half = cfg.paddle_span / 2.0
    if (state.ball_vx > 0.0 and state.ball_x >= PONG_AGENT_COL - 1.0
            and abs(state.ball_y - state.paddle_axis) <= half + 1.0):
        _bounce_off_paddle(state, cfg, state.paddle_axis, state.ball_y, -1.0)
        state.ball_x = PONG_AGENT_COL - 1.0
        events.append("paddle_bounce")
    elif (state.ball_vx < 0.0
          and state.ball_x <= PONG_OPPONENT_COL + PONG_PADDLE_W
          and abs(state.ball_y - state.opponent_axis) <= half + 1.0):
        _bounce_off_paddle(state, cfg, state.opponent_axis, state.ball_y, 1.0)
        state.ball_x = float(PONG_OPPONENT_COL + PONG_PADDLE_W)
        events.append("paddle_bounce")
    elif state.ball_x > FIELD_RIGHT:
        state.points_against += 1
        state.score -= 1
        reward -= 1.0
        state.ball_in_play = False
        events.append("point_against")
        if state.points_against >= cfg.max_points:
            state.terminal = True
    elif state.ball_x < FIELD_LEFT:
        state.points_for += 1
        state.score += 1
        reward += 1.0
        state.ball_in_play = False
        events.append("point_for")
        if state.points_for >= cfg.max_points:
            state.terminal = True
    return reward


def sim_step(state: SimState, action: Action,
             cfg: SimConfig) -> tuple[SimState, StepOutcome]:
    """Advance `frameskip` physics ticks with the action held down.

    Rewards accumulate across the skipped ticks. Raises TerminalStepError
    if the episode already ended.
    """
    if state.terminal:
        raise TerminalStepError("episode is over; reset before stepping")
    action = Action(action)
    tick = _tick_breakout if cfg.game is Game.BREAKOUT else _tick_pong
    reward = 0.0
    events: list[str] = []
    for _ in range(cfg.frameskip):
        reward += tick(state, cfg, action, events)
        state.tick += 1
        if state.terminal:
            break
    return state, StepOutcome(reward=reward, terminal=state.terminal,
                              events=tuple(events))


def _draw(pixels: np.ndarray, top: int, left: int, h: int, w: int,
          shade: int) -> None:
    pixels[max(0, top):max(0, top + h), max(0, left):max(0, left + w)] = shade


def _anchor(center: float, size: int) -> int:
    # Round center - (size-1)/2 to the nearest pixel: the sprite centroid
    # anchor + (size-1)/2 then stays within 0.5 px of the physics position.
    return int(math.floor(center - (size - 1) / 2.0 + 0.5))


def render(state: SimState, cfg: SimConfig) -> RawFrame:
    """Draw the state as solid rectangles on black, 210x160 luminance."""
    pixels = np.zeros((cfg.field_height, cfg.field_width), dtype=np.uint8)
    if cfg.game is Game.BREAKOUT:
        for i in range(cfg.brick_rows):
            for j in range(cfg.brick_cols):
                if state.bricks[i, j]:
                    _draw(pixels, BRICK_TOP + i * BRICK_H,
                          BRICK_LEFT + j * BRICK_W, BRICK_H, BRICK_W,
                          BRICK_SHADE)
        _draw(pixels, BREAKOUT_PADDLE_TOP,
              _anchor(state.paddle_axis, cfg.paddle_span),
              cfg.paddle_thickness, cfg.paddle_span, PADDLE_SHADE)
    else:
        _draw(pixels, _anchor(state.paddle_axis, cfg.paddle_span),
              PONG_AGENT_COL, cfg.paddle_span, PONG_PADDLE_W, PADDLE_SHADE)
        _draw(pixels, _anchor(state.opponent_axis, cfg.paddle_span),
              PONG_OPPONENT_COL, cfg.paddle_span, PONG_PADDLE_W, PADDLE_SHADE)
    if state.ball_in_play:
        _draw(pixels, _anchor(state.ball_y, BALL_SIZE),
              _anchor(state.ball_x, BALL_SIZE), BALL_SIZE, BALL_SIZE,
              BALL_SHADE)
    return RawFrame(width=cfg.field_width, height=cfg.field_height,
                    pixels=pixels)
