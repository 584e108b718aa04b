"""Episode runner and benchmark harness.

An environment exposes two calls: reset() -> RawFrame and
step(action) -> (RawFrame, reward, terminal). Two implementations ship:
SimEnvironment wraps the built-in simulator; RemoteEnvironment speaks the
wire protocol with an external game over a binary stream, strictly
alternating frame -> action.

run_episode loops perceive -> control -> act until terminal or a step cap.
run_batch executes N episodes (optionally across worker processes), merges
results by episode index, and emits deterministic reports: episodes.csv,
histogram.csv, and summary.json, byte-identical for identical config+seed.
Episodes that die on a broken connection are marked aborted and excluded
from statistics; a batch with more than 10% aborted episodes is flagged
failed.

Per-episode seeds derive from the master seed as seed*1000003 + index, so
results do not depend on worker count or scheduling.
"""

from __future__ import annotations

import csv
import json
import math
import os
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import BinaryIO, Callable, Protocol

from . import wire
from .config import RunConfig
from .hierarchy import Action, HierarchyController, HierarchySpec
from .perception import (CropConfig, GameLayout, PerceptState, RawFrame,
                         classify, detect_blobs, preprocess, track, write_pgm)
from .sim import Game, SimConfig, render, sim_step
from .sim import reset as sim_reset

SEED_STRIDE = 1000003


class Environment(Protocol):
    def reset(self) -> RawFrame: ...
    def step(self, action: Action) -> tuple[RawFrame, float, bool]: ...


class SimEnvironment:
    """Built-in simulator behind the frame-in/action-out surface."""

    def __init__(self, cfg: SimConfig) -> None:
        self.cfg = cfg
        self.state = None
        self.last_events: tuple[str, ...] = ()

    def reset(self) -> RawFrame:
        self.state = sim_reset(self.cfg)
        self.last_events = ()
        return render(self.state, self.cfg)

    def step(self, action: Action) -> tuple[RawFrame, float, bool]:
        self.state, outcome = sim_step(self.state, action, self.cfg)
        self.last_events = outcome.events
        return render(self.state, self.cfg), outcome.reward, outcome.terminal

    @property
    def score(self) -> float:
        return float(self.state.score)

    @property
    def penalties(self) -> int:
        """Lives lost so far, or points conceded for the rally game."""
        if self.cfg.game is Game.BREAKOUT:
            return self.cfg.lives - self.state.lives
        return self.state.points_against


class RemoteEnvironment:
    """Wire-protocol peer over a bidirectional binary stream.

    The remote side opens every episode by sending an initial frame
    unprompted; afterwards each action written is answered by one frame.
    Score is the running reward sum, since the remote's internal tally is
    not on the wire.
    """

    def __init__(self, stream: BinaryIO) -> None:
        self.stream = stream
        self._score = 0.0
        self._penalties = 0

    def reset(self) -> RawFrame:
        msg = wire.read_frame(self.stream)
        if msg is None:
            raise ConnectionError("remote closed before the episode started")
        self._score = 0.0
        self._penalties = 0
        return msg.to_raw_frame()

    def step(self, action: Action) -> tuple[RawFrame, float, bool]:
        wire.write_action(self.stream, action)
        msg = wire.read_frame(self.stream)
        if msg is None:
            raise ConnectionError("remote closed mid-episode")
        reward = msg.reward if msg.reward is not None else 0.0
        self._score += reward
        if reward <= -1.0:
            self._penalties += 1
        return msg.to_raw_frame(), reward, msg.terminal

    def drain_to_terminal(self, max_frames: int = 200_000) -> None:
        """Pump NOOPs until the remote ends the episode.

        Called when a step cap cuts an episode short, so the strict
        frame/action alternation stays aligned for the next episode.
        """
        for _ in range(max_frames):
            wire.write_action(self.stream, Action.NOOP)
            msg = wire.read_frame(self.stream)
            if msg is None:
                raise ConnectionError("remote closed while draining")
            if msg.terminal:
                return
        raise ConnectionError("remote never ended the episode while draining")

    @property
    def score(self) -> float:
        return self._score

    @property
    def penalties(self) -> int:
        return self._penalties


class PctPolicy:
    """Full pipeline: preprocess, detect, classify, track, control."""

    def __init__(self, crop: CropConfig, layout: GameLayout,
                 spec: HierarchySpec) -> None:
        self.crop = crop
        self.layout = layout
        self.controller = HierarchyController(spec)
        self.percept = PerceptState.initial()

    def act(self, frame: RawFrame) -> Action:
        grid = preprocess(frame, self.crop)
        ball, paddle = classify(detect_blobs(grid), self.layout)
        self.percept = track(self.percept, ball, paddle, self.layout)
        return self.controller.act(self.percept)

    def reset(self) -> None:
        self.controller.reset()
        self.percept = PerceptState.initial()


class RandomPolicy:
    """Uniform random action each step; the scoring baseline."""

    def __init__(self, seed: int) -> None:
        self.rng = random.Random(seed)

    def act(self, frame: RawFrame) -> Action:
        return Action(self.rng.randrange(4))

    def reset(self) -> None:
        pass


@dataclass(frozen=True)
class EpisodeResult:
    index: int
    score: float
    total_reward: float
    steps: int
    penalties: int
    termination: str | None   # "terminal" | "step_cap"; None if aborted
    aborted: bool = False


def episode_seed(master: int, index: int) -> int:
    return master * SEED_STRIDE + index


def make_policy(cfg: RunConfig, index: int):
    if cfg.policy == "random":
        # Offset keeps the policy stream distinct from the sim serve stream.
        return RandomPolicy(episode_seed(cfg.seed, index) + 7919)
    return PctPolicy(cfg.crop, cfg.layout, cfg.hierarchy)


def make_sim_environment(cfg: RunConfig, index: int) -> SimEnvironment:
    return SimEnvironment(replace(cfg.sim, seed=episode_seed(cfg.seed, index)))


def run_episode(cfg: RunConfig, env, policy, index: int = 0,
                dump_dir: str | None = None) -> EpisodeResult:
    """One episode to terminal or step cap; connection faults mark it aborted."""
    policy.reset()
    steps = 0
    total = 0.0
    try:
        frame = env.reset()
        termination = "step_cap"
        while steps < cfg.max_steps:
            if dump_dir is not None:
                write_pgm(frame, os.path.join(
                    dump_dir, f"ep{index:03d}_step{steps:05d}.pgm"))
            action = policy.act(frame)
            frame, reward, terminal = env.step(action)
            total += reward
            steps += 1
            if terminal:
                termination = "terminal"
                break
        score = env.score
        penalties = env.penalties
        if termination == "step_cap" and hasattr(env, "drain_to_terminal"):
            env.drain_to_terminal()
        return EpisodeResult(index=index, score=score, total_reward=total,
                             steps=steps, penalties=penalties,
                             termination=termination)
    except (wire.FramingError, ConnectionError, OSError):
        return EpisodeResult(index=index, score=0.0, total_reward=total,
                             steps=steps, penalties=0, termination=None,
                             aborted=True)


def _run_chunk(cfg: RunConfig, indices: list[int]) -> list[EpisodeResult]:
    results = []
    for i in indices:
        dump = cfg.dump_frames if i == 0 else None
        results.append(run_episode(cfg, make_sim_environment(cfg, i),
                                   make_policy(cfg, i), index=i,
                                   dump_dir=dump))
    return results


@dataclass(frozen=True)
class BatchReport:
    """Merged batch outcome plus everything the report files contain."""

    episodes: tuple[EpisodeResult, ...]
    stats: dict
    histogram_bin: int
    histogram: tuple[tuple[int, int, int], ...]  # (start, end, count)
    aborted: int
    failed: bool
    config: dict
    mode: dict

    def to_summary_dict(self) -> dict:
        return {
            "config": self.config,
            "mode": self.mode,
            "episodes": len(self.episodes) - self.aborted,
            "aborted": self.aborted,
            "scores": self.stats,
            "histogram": {
                "bin_width": self.histogram_bin,
                "bins": [{"start": lo, "end": hi, "count": n}
                         for lo, hi, n in self.histogram],
            },
        }

    def summary_json(self) -> str:
        return json.dumps(self.to_summary_dict(), sort_keys=True, indent=2) + "\n"

    def text_histogram(self, width: int = 50) -> str:
        if not self.histogram:
            return "(no scored episodes)\n"
        peak = max(n for _, _, n in self.histogram) or 1
        lines = []
        for lo, hi, n in self.histogram:
            bar = "#" * max(0, round(n * width / peak))
            lines.append(f"[{lo:>7}, {hi:>7}) {bar} {n}")
        return "\n".join(lines) + "\n"


def _score_stats(scores: list[float]) -> dict:
    if not scores:
        return {"mean": None, "median": None, "best": None, "worst": None,
                "std": None}
    return {
        "mean": statistics.fmean(scores),
        "median": statistics.median(scores),
        "best": max(scores),
        "worst": min(scores),
        "std": statistics.pstdev(scores),
    }


def _build_histogram(scores: list[float],
                     bin_width: int) -> tuple[tuple[int, int, int], ...]:
    if not scores:
        return ()
    lo_bin = math.floor(min(scores) / bin_width)
    hi_bin = math.floor(max(scores) / bin_width)
    counts = [0] * (hi_bin - lo_bin + 1)
    for s in scores:
        counts[math.floor(s / bin_width) - lo_bin] += 1
    return tuple((int((lo_bin + i) * bin_width),
                  int((lo_bin + i + 1) * bin_width), c)
                 for i, c in enumerate(counts))


def run_batch(cfg: RunConfig, env_factory: Callable[[int], object] | None = None,
              policy_factory: Callable[[int], object] | None = None) -> BatchReport:
    """Run cfg.episodes episodes and assemble (and optionally write) reports.

    Factories override environment/policy construction (required for remote
    runs, where the caller owns the connection); with factories supplied the
    batch runs sequentially in-process. Worker processes are used only for
    the self-contained simulator path.
    """
    indices = list(range(cfg.episodes))
    if cfg.dump_frames:
        os.makedirs(cfg.dump_frames, exist_ok=True)

    if env_factory is None and policy_factory is None and cfg.workers > 1 \
            and cfg.environment != "remote":
        chunks = [indices[i::cfg.workers] for i in range(cfg.workers)]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(_run_chunk, [cfg] * len(chunks), chunks))
        results = sorted((r for part in parts for r in part),
                         key=lambda r: r.index)
    else:
        env_factory = env_factory or (lambda i: make_sim_environment(cfg, i))
        policy_factory = policy_factory or (lambda i: make_policy(cfg, i))
        results = []
        for i in indices:
            dump = cfg.dump_frames if i == 0 else None
            results.append(run_episode(cfg, env_factory(i), policy_factory(i),
                                       index=i, dump_dir=dump))

    kept = [r for r in results if not r.aborted]
    aborted = len(results) - len(kept)
    scores = [r.score for r in kept]
    report = BatchReport(
        episodes=tuple(results),
        stats=_score_stats(scores),
        histogram_bin=cfg.histogram_bin,
        histogram=_build_histogram(scores, cfg.histogram_bin),
        aborted=aborted,
        failed=aborted > 0.1 * cfg.episodes,
        config=cfg.to_dict(),
        mode={
            "environment": cfg.environment,
            "policy": cfg.policy,
            "frameskip": cfg.sim.frameskip,
            "noframeskip": cfg.sim.frameskip == 1,
            "deterministic": True,
            "seed": cfg.seed,
        })
    if cfg.out_dir:
        write_reports(report, cfg.out_dir)
    return report


def write_reports(report: BatchReport, out_dir: str) -> dict[str, str]:
    """Write episodes.csv, histogram.csv, summary.json; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "episodes": os.path.join(out_dir, "episodes.csv"),
        "histogram": os.path.join(out_dir, "histogram.csv"),
        "summary": os.path.join(out_dir, "summary.json"),
    }
    with open(paths["episodes"], "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh)
        w.writerow(["episode", "score", "total_reward", "steps", "penalties",
                    "termination", "aborted"])
        for r in report.episodes:
            w.writerow([r.index, r.score, r.total_reward, r.steps,
                        r.penalties, r.termination or "", int(r.aborted)])
    with open(paths["histogram"], "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_start", "bin_end", "count"])
        for lo, hi, n in report.histogram:
            w.writerow([lo, hi, n])
    with open(paths["summary"], "w", encoding="ascii") as fh:
        fh.write(report.summary_json())
    return paths


# ---------------------------------------------------------------------------
# Diagnostics used by the acceptance suite.

def serve_interception_rate(trials: int = 500, seed: int = 0,
                            frameskip: int = 4,
                            step_cap: int = 500) -> float:
    """Fraction of fresh-episode serves the controller's paddle returns.

    Each trial is an independent seeded game; the trial counts as a hit if
    the first ball contact is a paddle bounce rather than a lost life.
    """
    hits = 0
    crop = CropConfig()
    layout = GameLayout.for_breakout()
    for i in range(trials):
        cfg = SimConfig.breakout(seed=episode_seed(seed, i),
                                 frameskip=frameskip)
        env = SimEnvironment(cfg)
        policy = PctPolicy(crop, layout, HierarchySpec())
        frame = env.reset()
        for _ in range(step_cap):
            frame, _, terminal = env.step(policy.act(frame))
            if "paddle_bounce" in env.last_events:
                hits += 1
                break
            if "life_lost" in env.last_events or terminal:
                break
    return hits / trials


def convergence_bound(offset: float, paddle_speed: float = 2.0,
                      integrator_limit: int = 3) -> int:
    """Guaranteed tick budget for closing a stationary offset.

    Saturated pressing nets paddle_speed/3 px/tick under the integrator, so
    3*|offset|/speed ticks cover the distance; doubling that absorbs duty
    charge-up and end-of-travel pacing, plus 2*limit transient ticks:
    bound = 2*limit + ceil(6*|offset|/paddle_speed). Validated against the
    closed-loop kinematics in tools/derive_bounds.py.
    """
    return 2 * integrator_limit + math.ceil(6.0 * abs(offset) / paddle_speed)


def stationary_ball_convergence(offset: float, paddle_speed: float = 2.0,
                                paddle_span: float = 16.0,
                                spec: HierarchySpec | None = None,
                                max_ticks: int = 2000) -> int:
    """Ticks until the paddle first sits within half a span of a fixed ball.

    Pure controller kinematics at one decision per physics tick: the paddle
    integrates the controller's presses; percepts are fed synthetically.
    Returns -1 if the cap is hit first.
    """
    spec = spec if spec is not None else HierarchySpec()
    controller = HierarchyController(spec)
    paddle = 0.0
    ball = float(offset)
    direction = 0
    half = paddle_span / 2.0
    deadband = 0.25
    for tick in range(max_ticks):
        percept = PerceptState(ball_x=ball, ball_y=0.0, ball_valid=True,
                               ball_vx=0.0, ball_vy=0.0, paddle_axis=paddle,
                               paddle_valid=True, paddle_direction=direction,
                               stale_ticks=0)
        action = controller.act(percept)
        before = paddle
        if action is Action.RIGHT:
            paddle += paddle_speed
        elif action is Action.LEFT:
            paddle -= paddle_speed
        delta = paddle - before
        direction = 1 if delta > deadband else (-1 if delta < -deadband else 0)
        if abs(ball - paddle) <= half:
            return tick + 1
    return -1


def measure_latency(frames: int = 200, seed: int = 0) -> float:
    """Mean perceive+control seconds per 210x160 frame, single core."""
    cfg = SimConfig.breakout(seed=seed)
    env = SimEnvironment(cfg)
    policy = PctPolicy(CropConfig(), GameLayout.for_breakout(),
                       HierarchySpec())
    frame = env.reset()
    rendered = []
    for _ in range(frames):
        action = policy.act(frame)
        frame, _, terminal = env.step(action)
        rendered.append(frame)
        if terminal:
            break
    policy.reset()
    start = time.perf_counter()
    for frame in rendered:
        policy.act(frame)
    elapsed = time.perf_counter() - start
    return elapsed / len(rendered)
