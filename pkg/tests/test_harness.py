"""Episode loop, batch reports, remote-protocol driving, and diagnostics."""

from __future__ import annotations

import csv
import socket
import statistics
import threading

import numpy as np

from pctarcade import harness, wire
from pctarcade.config import default_config
from pctarcade.harness import (
    RemoteEnvironment,
    episode_seed,
    run_batch,
    run_episode,
    serve_interception_rate,
    stationary_ball_convergence,
    convergence_bound,
    measure_latency,
)
from pctarcade.hierarchy import Action
from pctarcade.perception import RawFrame


class _NoopPolicy:
    def act(self, frame: RawFrame) -> Action:
        return Action.NOOP

    def reset(self) -> None:
        pass


class _FaultyEnvironment:
    """Accepts reset, then drops the connection on the first step."""

    score = 0.0
    penalties = 0

    def reset(self) -> RawFrame:
        return _tiny_frame()

    def step(self, action: Action):
        raise ConnectionError("synthetic fault")


def _tiny_frame(value: int = 0) -> RawFrame:
    pixels = np.full((4, 4), value, dtype=np.uint8)
    return RawFrame(width=4, height=4, pixels=pixels)


def _remote_game(sock: socket.socket, episodes: list[list[tuple[float, bool]]],
                 close_early: bool = False) -> None:
    """Scripted wire-protocol peer: each episode is a list of (reward, terminal)."""
    stream = sock.makefile("rwb")
    try:
        for script in episodes:
            wire.write_frame(stream, _tiny_frame())
            for reward, terminal in script:
                wire.read_action(stream)
                wire.write_frame(stream, _tiny_frame(), terminal=terminal,
                                 reward=reward)
                if close_early:
                    return
    finally:
        stream.close()
        sock.close()


def test_episode_seed_stride() -> None:
    assert episode_seed(0, 0) == 0
    assert episode_seed(2, 5) == 2 * harness.SEED_STRIDE + 5
    assert episode_seed(1, 0) != episode_seed(0, 1)


def test_zero_step_cap_scores_zero() -> None:
    cfg = default_config("sim_breakout", episodes=1, max_steps=0)
    result = run_episode(cfg, harness.make_sim_environment(cfg, 0),
                         harness.make_policy(cfg, 0))
    assert result.steps == 0
    assert result.score == 0.0
    assert result.termination == "step_cap"
    assert not result.aborted


def test_random_episode_reaches_terminal() -> None:
    cfg = default_config("sim_breakout", episodes=1, policy="random", seed=4)
    result = run_episode(cfg, harness.make_sim_environment(cfg, 0),
                         harness.make_policy(cfg, 0))
    assert result.termination == "terminal"
    assert result.penalties == 5
    assert result.total_reward == result.score - result.penalties


def test_single_episode_stats_collapse() -> None:
    cfg = default_config("sim_breakout", episodes=1, policy="random",
                         seed=8, max_steps=300)
    report = run_batch(cfg)
    stats = report.stats
    assert stats["mean"] == stats["median"] == stats["best"] == stats["worst"]
    assert stats["std"] == 0.0
    assert stats["mean"] == report.episodes[0].score


def test_summary_json_is_byte_identical_across_runs(tmp_path) -> None:
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    cfg_a = default_config("sim_breakout", episodes=4, policy="random",
                           seed=6, max_steps=250, out_dir=str(out_a))
    cfg_b = default_config("sim_breakout", episodes=4, policy="random",
                           seed=6, max_steps=250, out_dir=str(out_b))
    report_a = run_batch(cfg_a)
    report_b = run_batch(cfg_b)
    assert report_a.summary_json() == report_b.summary_json()
    assert (out_a / "summary.json").read_bytes() == (out_b / "summary.json").read_bytes()
    assert (out_a / "episodes.csv").read_bytes() == (out_b / "episodes.csv").read_bytes()


def test_worker_processes_match_sequential_run() -> None:
    sequential = run_batch(default_config("sim_breakout", episodes=6,
                                          policy="random", seed=12,
                                          max_steps=200, workers=1))
    parallel = run_batch(default_config("sim_breakout", episodes=6,
                                        policy="random", seed=12,
                                        max_steps=200, workers=3))
    assert parallel.episodes == sequential.episodes
    assert parallel.summary_json() == sequential.summary_json()


def test_stats_match_recomputation_from_csv(tmp_path) -> None:
    cfg = default_config("sim_breakout", episodes=8, policy="random",
                         seed=2, max_steps=250, out_dir=str(tmp_path))
    report = run_batch(cfg)
    with open(tmp_path / "episodes.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    scores = [float(r["score"]) for r in rows if r["aborted"] == "0"]
    assert len(rows) == 8
    assert report.stats["mean"] == statistics.fmean(scores)
    assert report.stats["median"] == statistics.median(scores)
    assert report.stats["std"] == statistics.pstdev(scores)
    assert report.stats["best"] == max(scores)
    assert report.stats["worst"] == min(scores)


def test_histogram_bins_are_contiguous_and_complete() -> None:
    cfg = default_config("sim_breakout", episodes=6, policy="random",
                         seed=3, max_steps=400)
    report = run_batch(cfg)
    scores = [r.score for r in report.episodes if not r.aborted]
    assert sum(n for _, _, n in report.histogram) == len(scores)
    for (_, prev_end, _), (next_start, _, _) in zip(report.histogram,
                                                    report.histogram[1:]):
        assert next_start == prev_end
    for lo, hi, n in report.histogram:
        assert hi - lo == report.histogram_bin
        assert n == sum(1 for s in scores if lo <= s < hi)
    assert report.text_histogram().count("\n") == len(report.histogram)


def test_aborted_episodes_are_excluded_and_flagged() -> None:
    cfg = default_config("sim_breakout", episodes=4, policy="random",
                         seed=1, max_steps=100)
    faulty = {1, 3}

    def env_factory(i: int):
        return (_FaultyEnvironment() if i in faulty
                else harness.make_sim_environment(cfg, i))

    report = run_batch(cfg, env_factory=env_factory,
                       policy_factory=lambda i: _NoopPolicy())
    assert report.aborted == 2
    assert report.failed
    assert [r.aborted for r in report.episodes] == [False, True, False, True]
    assert all(r.termination is None for r in report.episodes if r.aborted)
    assert sum(n for _, _, n in report.histogram) == 2


def test_remote_environment_runs_episodes_and_audits_rewards() -> None:
    left, right = socket.socketpair()
    script = [[(1.0, False), (1.0, False), (-1.0, False), (1.0, True)],
              [(0.5, False), (0.5, True)]]
    server = threading.Thread(target=_remote_game, args=(right, script))
    server.start()
    try:
        cfg = default_config("remote", listen="127.0.0.1:0", episodes=2,
                             max_steps=100)
        env = RemoteEnvironment(left.makefile("rwb"))
        report = run_batch(cfg, env_factory=lambda i: env,
                           policy_factory=lambda i: _NoopPolicy())
    finally:
        server.join()
        left.close()
    first, second = report.episodes
    assert first.score == 2.0 and first.steps == 4
    assert first.penalties == 1
    assert first.termination == "terminal"
    assert second.score == 1.0 and second.steps == 2
    assert report.aborted == 0


def test_remote_step_cap_drains_to_the_episode_boundary() -> None:
    left, right = socket.socketpair()
    script = [[(0.0, False)] * 29 + [(0.0, True)],
              [(1.0, False), (1.0, True)]]
    server = threading.Thread(target=_remote_game, args=(right, script))
    server.start()
    try:
        cfg = default_config("remote", listen="127.0.0.1:0", episodes=2,
                             max_steps=3)
        env = RemoteEnvironment(left.makefile("rwb"))
        capped = run_episode(cfg, env, _NoopPolicy(), index=0)
        clean = run_episode(cfg, env, _NoopPolicy(), index=1)
    finally:
        server.join()
        left.close()
    assert capped.termination == "step_cap"
    assert capped.steps == 3
    assert clean.termination == "terminal"
    assert clean.score == 2.0


def test_remote_disconnect_marks_the_episode_aborted() -> None:
    left, right = socket.socketpair()
    script = [[(0.0, False)] * 50]
    server = threading.Thread(target=_remote_game, args=(right, script, True))
    server.start()
    try:
        cfg = default_config("remote", listen="127.0.0.1:0", episodes=1,
                             max_steps=50)
        env = RemoteEnvironment(left.makefile("rwb"))
        result = run_episode(cfg, env, _NoopPolicy(), index=0)
    finally:
        server.join()
        left.close()
    assert result.aborted
    assert result.termination is None


def test_dump_frames_writes_graymaps(tmp_path) -> None:
    dump = tmp_path / "frames"
    cfg = default_config("sim_breakout", episodes=1, policy="random",
                         seed=0, max_steps=3, dump_frames=str(dump))
    run_batch(cfg)
    files = sorted(dump.iterdir())
    assert len(files) == 3
    assert files[0].name == "ep000_step00000.pgm"
    assert files[0].read_bytes().startswith(b"P5\n160 210\n255\n")


def test_mode_block_describes_the_run() -> None:
    cfg = default_config("sim_pong", episodes=1, policy="random", max_steps=5,
                         seed=77)
    report = run_batch(cfg)
    assert report.mode == {
        "environment": "sim_pong",
        "policy": "random",
        "frameskip": 4,
        "noframeskip": False,
        "deterministic": True,
        "seed": 77,
    }


def test_interception_rate_smoke() -> None:
    assert serve_interception_rate(trials=20, seed=0) >= 0.8


def test_stationary_ball_converges_within_the_derived_bound() -> None:
    for offset in (4.0, 16.0, 40.0, 57.5):
        ticks = stationary_ball_convergence(offset)
        assert 0 < ticks <= convergence_bound(offset)
        mirrored = stationary_ball_convergence(-offset)
        assert 0 < mirrored <= convergence_bound(offset)


def test_latency_diagnostic_smoke() -> None:
    assert measure_latency(frames=30) < 0.05
