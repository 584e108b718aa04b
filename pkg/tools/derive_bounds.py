#!/usr/bin/env python3
"""Pre-build reachability and convergence derivation for the paddle controller.

Standalone: no package imports. A 1-D kinematic model of the press pipeline
(duty accumulator -> press integrator -> paddle displacement) is simulated
against stationary and drifting targets to derive:

  * the sustained paddle rate under the press integrator,
  * the tracking lag for a ball drifting at the maximum serve angle,
  * worst-case serve coverage margins for the default breakout geometry,
  * a convergence step bound for the stationary-ball diagnostic.

The chosen defaults are frozen here; the acceptance suite asserts against
the bounds this script prints. Exits nonzero if any margin is < 1.15.
"""

import math
import sys

# ---- proposed simulator defaults (breakout) --------------------------------
PLAY_LEFT = 14.0
PLAY_WIDTH = 132.0
PLAY_RIGHT = PLAY_LEFT + PLAY_WIDTH - 1.0          # inclusive col 145
PADDLE_SPAN = 16.0
PADDLE_SPEED = 2.0                                 # px per press
BALL_SPEED = 1.0                                   # px per physics tick
SERVE_ROW = 85.0
PADDLE_TOP = 140.0
SERVE_COL_MIN, SERVE_COL_MAX = 44.0, 115.0
SERVE_ANGLE_MAX = math.radians(50.0)
FRAMESKIP = 4
INTEGRATOR_LIMIT = 3
PRESS_SCALE = 1.0 / 16.0

HALF_SPAN = PADDLE_SPAN / 2.0
PADDLE_START = (PLAY_LEFT + PLAY_RIGHT) / 2.0      # 79.5


def press_pipeline_velocity(error_sequence, press_scale, limit, step_px):
    """Replay the duty accumulator + integrator over an error sequence.

    Returns the list of per-tick paddle displacements. Independent re-statement
    of the press rules: duty += e*scale; |duty|>=1 emits a press and keeps the
    fractional remainder (clamped to one tick of charge); a sign flip discards
    the charge; `limit` consecutive same-direction presses turn the last one
    into a single opposite press and restart the run.
    """
    duty = 0.0
    count = 0
    direction = 0
    moves = []
    for e in error_sequence:
        press = 0
        if e != 0.0:
            if duty != 0.0 and (duty > 0) != (e > 0):
                duty = 0.0
            duty += e * press_scale
            if abs(duty) >= 1.0:
                press = 1 if duty > 0 else -1
                duty -= float(press)
                duty = max(-1.0, min(1.0, duty))
        if press == 0:
            count, direction = 0, 0
            moves.append(0.0)
            continue
        if press == direction:
            count += 1
            if count >= limit:
                count, direction = 0, 0
                moves.append(-press * step_px)
                continue
        else:
            count, direction = 1, press
        moves.append(press * step_px)
    return moves


def sustained_rate():
    """Net px/tick under saturated pressing (error pegged)."""
    moves = press_pipeline_velocity([1e6] * 3000, PRESS_SCALE, INTEGRATOR_LIMIT,
                                    PADDLE_SPEED)
    return sum(moves[300:]) / len(moves[300:])


def closed_loop_chase(target_fn, ticks, start=PADDLE_START):
    """1-D chase of a moving target; error is target - paddle (proportional)."""
    pos = start
    duty = 0.0
    count = 0
    direction = 0
    trace = []
    for t in range(ticks):
        target = target_fn(t)
        e = target - pos
        press = 0
        if e != 0.0:
            if duty != 0.0 and (duty > 0) != (e > 0):
                duty = 0.0
            duty += e * PRESS_SCALE
            if abs(duty) >= 1.0:
                press = 1 if duty > 0 else -1
                duty -= float(press)
                duty = max(-1.0, min(1.0, duty))
        if press == 0:
            count, direction = 0, 0
        elif press == direction:
            count += 1
            if count >= INTEGRATOR_LIMIT:
                count, direction = 0, 0
                press = -press
        else:
            count, direction = 1, press
        pos += press * PADDLE_SPEED
        trace.append(abs(target - pos))
    return trace


def main():
    failures = []
    rate = sustained_rate()
    print(f"sustained paddle rate under integrator: {rate:.3f} px/tick "
          f"(analytic {PADDLE_SPEED}/3 = {PADDLE_SPEED / 3:.3f})")

    # Tracking lag against a target drifting at the worst serve angle.
    vx_max = BALL_SPEED * math.sin(SERVE_ANGLE_MAX)
    trace = closed_loop_chase(lambda t: PADDLE_START + vx_max * t, 600)
    lag = max(trace[200:])
    print(f"max serve drift {vx_max:.3f} px/tick -> steady tracking lag "
          f"{lag:.2f} px (half span {HALF_SPAN})")
    if lag >= HALF_SPAN:
        failures.append("tracking lag exceeds half paddle span")

    # Worst-case serve: steepest descent (shortest time) with max offset.
    descent_px = PADDLE_TOP - SERVE_ROW - 2.0
    t_min = descent_px / BALL_SPEED
    worst_offset = max(abs(SERVE_COL_MIN + 1.0 - PADDLE_START),
                       abs(SERVE_COL_MAX + 1.0 - PADDLE_START))
    need = worst_offset - HALF_SPAN
    cover = t_min * rate
    margin = cover / need
    print(f"steep serve: {t_min:.0f} ticks, worst offset {worst_offset:.1f} px, "
          f"required {need:.1f} px, coverage {cover:.1f} px, margin {margin:.2f}x")
    if margin < 1.15:
        failures.append("steep-serve coverage margin below 1.15")

    # Press quantum at frameskip must not exceed half span (no dither misses).
    quantum = FRAMESKIP * PADDLE_SPEED
    print(f"press quantum at frameskip {FRAMESKIP}: {quantum:.0f} px "
          f"(half span {HALF_SPAN})")
    if quantum > HALF_SPAN:
        failures.append("press quantum exceeds half paddle span")

    # Stationary-ball convergence bound: 2L + ceil(6*D0/paddle_speed) ticks.
    print("stationary-ball convergence (frameskip 1):")
    for d0 in (8.0, 16.0, 24.0, 40.0, 57.5):
        bound = 2 * INTEGRATOR_LIMIT + math.ceil(6.0 * d0 / PADDLE_SPEED)
        trace = closed_loop_chase(lambda t: PADDLE_START + d0, bound + 50)
        reached = next((i for i, d in enumerate(trace) if d <= HALF_SPAN), None)
        ok = reached is not None and reached + 1 <= bound
        print(f"  D0={d0:6.1f}  reached tick {reached}  bound {bound}  "
              f"{'ok' if ok else 'VIOLATION'}")
        if not ok:
            failures.append(f"convergence bound violated at D0={d0}")

    # The rejected default press scale, for the record.
    alt_trace = closed_loop_chase(lambda t: PADDLE_START + vx_max * t, 600)
    old_scale_lag = vx_max / (PADDLE_SPEED * (1.0 / PLAY_WIDTH))
    print(f"rejected press scale 1/{PLAY_WIDTH:.0f}: analytic lag "
          f"{old_scale_lag:.0f} px >> half span -> interception infeasible")

    if failures:
        for f in failures:
            print(f"FAIL: {f}")
        return 1
    print("all margins ok; defaults frozen")
    return 0


if __name__ == "__main__":
    sys.exit(main())
