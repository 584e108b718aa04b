"""Four-level negative-feedback controller for paddle games.

Every level is the same comparator: error = gain * (reference - perception),
with an identity output function, so each level's error is the next level's
reference:

  level 1  ball-paddle offset      reference fixed at 0 (sit under the ball)
  level 2  sensed paddle direction reference = level-1 error
  level 3  paddle displacement     reference = level-2 error
  level 4  button press            reference = level-3 error

Level 4 converts its drive into a press frequency: a duty accumulator gathers
error * press_scale each tick and emits one press per unit of charge. A press
integrator counts consecutive same-direction presses and, on reaching its
limit, replaces the press with a single opposite press, arresting paddle
momentum. Nothing in the loop is learned; all constants are fixed up front.

Positions are measured in playing-field pixels along a single control axis
(columns for a bottom paddle, rows for a side paddle). A press toward the
growing coordinate maps to RIGHT on the horizontal axis and, matching the
stick sense of side-paddle games where RIGHT moves the paddle up, to LEFT on
the vertical axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .perception import PerceptState

# Positions, references, and errors are all plain finite floats.
Signal = float


class InvalidSignalError(ValueError):
    """A non-finite value tried to enter the control loop."""


def check_signal(value: float, name: str) -> float:
    if not math.isfinite(value):
        raise InvalidSignalError(f"{name} is not finite: {value!r}")
    return float(value)


class Action(enum.IntEnum):
    """Discrete joystick action. Values are the wire-protocol bytes."""

    NOOP = 0
    FIRE = 1
    RIGHT = 2
    LEFT = 3


class Axis(enum.Enum):
    """Which frame coordinate the controller steers along."""

    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class Press(enum.IntEnum):
    """One tick's press along the control axis, before button mapping."""

    BACKWARD = -1
    NONE = 0
    FORWARD = 1


def press_to_action(press: Press, axis: Axis) -> Action:
    """Map an axis-signed press onto the button that moves that way."""
    if press is Press.NONE:
        return Action.NOOP
    if axis is Axis.HORIZONTAL:
        return Action.RIGHT if press is Press.FORWARD else Action.LEFT
    # Vertical: rows grow downward and the DOWN button is LEFT.
    return Action.LEFT if press is Press.FORWARD else Action.RIGHT


@dataclass
class ControlUnit:
    """One comparator stage with its last inputs and outputs recorded."""

    gain: float = 1.0
    reference: Signal = 0.0
    last_perception: Signal = 0.0
    last_error: Signal = 0.0
    last_output: Signal = 0.0


def unit_step(unit: ControlUnit, perception: Signal, reference: Signal) -> tuple[Signal, Signal]:
    """Advance one comparator: error = gain * (reference - perception).

    The output function is the identity, so the returned output equals the
    error. The unit's last_* fields are updated in place. Non-finite inputs
    raise InvalidSignalError before touching the unit.
    """
    perception = check_signal(perception, "perception")
    reference = check_signal(reference, "reference")
    error = unit.gain * (reference - perception)
    unit.reference = reference
    unit.last_perception = perception
    unit.last_error = error
    unit.last_output = error
    return error, error


@dataclass(frozen=True)
class HierarchySpec:
    """Fixed constants of the four-level controller.

    press_scale converts level-four drive into duty per tick; the default
    saturates (one press every tick) at a 16 px error, well inside the
    playing field, so tracking lag stays under half a paddle width.
    """

    gains: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    top_reference: Signal = 0.0
    integrator_limit: int = 3
    press_scale: float = 1.0 / 16.0
    control_axis: Axis = Axis.HORIZONTAL

    def __post_init__(self) -> None:
        if len(self.gains) != 4:
            raise ValueError("gains must list exactly four levels")
        for g in self.gains:
            check_signal(g, "gain")
        check_signal(self.top_reference, "top_reference")
        if self.integrator_limit < 1:
            raise ValueError("integrator_limit must be >= 1")
        if not self.press_scale > 0.0:
            raise ValueError("press_scale must be > 0")


@dataclass
class HierarchyState:
    """Mutable per-controller state threaded through hierarchy_step."""

    units: tuple[ControlUnit, ControlUnit, ControlUnit, ControlUnit]
    integrator_count: int = 0
    integrator_direction: Press = Press.NONE
    press_duty: float = 0.0
    prev_paddle_axis: float | None = None

    @classmethod
    def fresh(cls, spec: HierarchySpec) -> HierarchyState:
        g1, g2, g3, g4 = spec.gains
        return cls(units=(ControlUnit(g1), ControlUnit(g2),
                          ControlUnit(g3), ControlUnit(g4)))


def press_rate(error: Signal, spec: HierarchySpec, duty: float) -> tuple[Press, float]:
    """Convert level-four drive into at most one press this tick.

    Fractional duty accumulates across ticks so small errors still press
    occasionally (error 0.5 at scale 1 presses every second tick). A sign
    change discards the opposing charge; leftover duty after a press is
    clamped to one press worth so a spike cannot bank a long burst.
    """
    error = check_signal(error, "error")
    if error == 0.0:
        return Press.NONE, duty
    if duty != 0.0 and (duty > 0.0) != (error > 0.0):
        duty = 0.0
    duty += error * spec.press_scale
    if abs(duty) < 1.0:
        return Press.NONE, duty
    press = Press.FORWARD if duty > 0.0 else Press.BACKWARD
    duty -= float(press)
    duty = max(-1.0, min(1.0, duty))
    return press, duty


def integrator_update(state: HierarchyState, spec: HierarchySpec,
                      press: Press) -> tuple[HierarchyState, Action]:
    """Count consecutive same-direction presses; revert on hitting the limit.

    A run of `integrator_limit` identical presses has its last press replaced
    by one opposite press and the count zeroed. Direction changes restart the
    count at one; a no-press tick clears it.
    """
    if press is Press.NONE:
        state.integrator_count = 0
        state.integrator_direction = Press.NONE
        return state, Action.NOOP
    count = state.integrator_count + 1 if press is state.integrator_direction else 1
    if count >= spec.integrator_limit:
        state.integrator_count = 0
        state.integrator_direction = Press.NONE
        return state, press_to_action(Press(-press), spec.control_axis)
    state.integrator_count = count
    state.integrator_direction = press
    return state, press_to_action(press, spec.control_axis)


def hierarchy_step(state: HierarchyState, spec: HierarchySpec,
                   percepts: PerceptState) -> tuple[HierarchyState, Action]:
    """Run all four levels once and return the tick's single action.

    A lost ball (tracker hold exhausted) short-circuits to FIRE, the relaunch
    button, and drops accumulated press charge so a stale burst cannot greet
    the next serve. An unseen paddle yields NOOP: there is nothing to steer.
    """
    if not percepts.ball_valid:
        state.press_duty = 0.0
        state.integrator_count = 0
        state.integrator_direction = Press.NONE
        if percepts.paddle_valid:
            state.prev_paddle_axis = percepts.paddle_axis
        return state, Action.FIRE
    if not percepts.paddle_valid:
        return state, Action.NOOP

    if spec.control_axis is Axis.HORIZONTAL:
        ball_axis = percepts.ball_x
    else:
        ball_axis = percepts.ball_y
    paddle_axis = percepts.paddle_axis

    # Level 1 perceives the offset as paddle - ball so that, against the
    # zero reference, a ball on the positive side yields a positive error
    # and the cascade presses toward it.
    offset = paddle_axis - ball_axis
    _, drive = unit_step(state.units[0], offset, spec.top_reference)
    _, drive = unit_step(state.units[1], float(percepts.paddle_direction), drive)
    moved = 0.0 if state.prev_paddle_axis is None else paddle_axis - state.prev_paddle_axis
    _, drive = unit_step(state.units[2], moved, drive)
    # The button is momentary, so level 4 always perceives it released.
    _, drive = unit_step(state.units[3], 0.0, drive)

    press, state.press_duty = press_rate(drive, spec, state.press_duty)
    state.prev_paddle_axis = paddle_axis
    return integrator_update(state, spec, press)


class HierarchyController:
    """Stateful convenience wrapper: feed percepts, receive actions."""

    def __init__(self, spec: HierarchySpec | None = None) -> None:
        self.spec = spec if spec is not None else HierarchySpec()
        self.state = HierarchyState.fresh(self.spec)

    def act(self, percepts: PerceptState) -> Action:
        self.state, action = hierarchy_step(self.state, self.spec, percepts)
        return action

    def reset(self) -> None:
        self.state = HierarchyState.fresh(self.spec)
