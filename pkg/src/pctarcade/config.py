"""Run configuration: INI file sections merged over per-game presets.

A run file holds up to four sections; every key is optional and falls back
to the preset selected by `environment`:

  [run]         environment, game, episodes, max_steps, policy, seed,
                workers, histogram_bin, out_dir, dump_frames, listen
  [hierarchy]   gains, top_reference, integrator_limit, press_scale
  [perception]  top_row, left_col, crop_height, crop_width, threshold,
                paddle_zone, ball_area_min, ball_area_max, ball_aspect_max,
                hold_ticks, direction_deadband
  [sim]         frameskip, paddle_span, paddle_thickness, paddle_speed,
                ball_speed, lives, max_points, opponent_speed_cap,
                serve_angle_max_deg, bounce_lateral_max, bounce_min_ratio,
                brick_values

Command-line overrides are applied last. The assembled RunConfig is
immutable and can serialize itself for inclusion in reports; volatile
values (output paths, endpoints) stay out of that dump so reports from
identical runs stay byte-identical wherever they are written.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

from .hierarchy import Axis, HierarchySpec
from .perception import CropConfig, GameLayout
from .sim import Game, SimConfig

ENVIRONMENTS = ("sim_breakout", "sim_pong", "remote")
POLICIES = ("pct", "random")


@dataclass(frozen=True)
class RunConfig:
    """Everything a batch run needs, fully resolved."""

    environment: str
    game: Game
    episodes: int
    max_steps: int
    policy: str
    seed: int
    workers: int
    histogram_bin: int
    out_dir: str | None
    dump_frames: str | None
    listen: str | None
    hierarchy: HierarchySpec
    crop: CropConfig
    layout: GameLayout
    sim: SimConfig

    def __post_init__(self) -> None:
        if self.environment not in ENVIRONMENTS:
            raise ValueError(f"environment must be one of {ENVIRONMENTS}")
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}")
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.histogram_bin < 1:
            raise ValueError("histogram_bin must be >= 1")
        if self.environment == "remote" and not self.listen:
            raise ValueError("remote environment requires a listen address")

    def to_dict(self) -> dict:
        """Stable primitive dump for reports; omits paths and endpoints."""
        return {
            "environment": self.environment,
            "game": self.game.value,
            "episodes": self.episodes,
            "max_steps": self.max_steps,
            "policy": self.policy,
            "seed": self.seed,
            "histogram_bin": self.histogram_bin,
            "hierarchy": {
                "gains": list(self.hierarchy.gains),
                "top_reference": self.hierarchy.top_reference,
                "integrator_limit": self.hierarchy.integrator_limit,
                "press_scale": self.hierarchy.press_scale,
                "control_axis": self.hierarchy.control_axis.value,
            },
            "perception": {
                "top_row": self.crop.top_row,
                "left_col": self.crop.left_col,
                "crop_height": self.crop.crop_height,
                "crop_width": self.crop.crop_width,
                "threshold": self.crop.binarize_threshold,
                "paddle_zone": list(self.layout.paddle_zone),
                "ball_area_min": self.layout.ball_area_min,
                "ball_area_max": self.layout.ball_area_max,
                "ball_aspect_max": self.layout.ball_aspect_max,
                "hold_ticks": self.layout.hold_ticks,
                "direction_deadband": self.layout.direction_deadband,
            },
            "sim": {
                "frameskip": self.sim.frameskip,
                "paddle_span": self.sim.paddle_span,
                "paddle_thickness": self.sim.paddle_thickness,
                "paddle_speed": self.sim.paddle_speed,
                "ball_speed": self.sim.ball_speed,
                "lives": self.sim.lives,
                "max_points": self.sim.max_points,
                "opponent_speed_cap": self.sim.opponent_speed_cap,
                "serve_angle_max_deg": self.sim.serve_angle_max_deg,
                "bounce_lateral_max": self.sim.bounce_lateral_max,
                "bounce_min_ratio": self.sim.bounce_min_ratio,
                "brick_values": list(self.sim.brick_values),
            },
        }


def _game_for(environment: str, game_key: str | None) -> Game:
    if environment == "sim_breakout":
        return Game.BREAKOUT
    if environment == "sim_pong":
        return Game.PONG
    if game_key is None:
        return Game.BREAKOUT
    return Game(game_key)


def default_config(environment: str = "sim_breakout", *, game: str | None = None,
                   episodes: int = 100, max_steps: int = 20000,
                   policy: str = "pct", seed: int = 0, workers: int = 1,
                   out_dir: str | None = None, dump_frames: str | None = None,
                   listen: str | None = None) -> RunConfig:
    """Preset RunConfig for an environment, no file required."""
    resolved_game = _game_for(environment, game)
    if resolved_game is Game.BREAKOUT:
        sim = SimConfig.breakout(seed=seed)
        layout = GameLayout.for_breakout()
        histogram_bin = 25
    else:
        sim = SimConfig.pong(seed=seed)
        layout = GameLayout.for_pong()
        histogram_bin = 1
    hierarchy = HierarchySpec(control_axis=layout.control_axis)
    return RunConfig(environment=environment, game=resolved_game,
                     episodes=episodes, max_steps=max_steps, policy=policy,
                     seed=seed, workers=workers, histogram_bin=histogram_bin,
                     out_dir=out_dir, dump_frames=dump_frames, listen=listen,
                     hierarchy=hierarchy, crop=CropConfig(), layout=layout,
                     sim=sim)


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(part.strip()) for part in text.split(","))


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(part.strip()) for part in text.split(","))


def load_config(path: str | None = None, **overrides) -> RunConfig:
    """Assemble a RunConfig from an INI file plus keyword overrides.

    Overrides accept the same names as default_config and win over file
    values; the file wins over presets.
    """
    parser = configparser.ConfigParser()
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    run = parser["run"] if parser.has_section("run") else {}

    def pick(name: str, fallback):
        if name in overrides and overrides[name] is not None:
            return overrides[name]
        if name in run:
            return run[name]
        return fallback

    environment = str(pick("environment", "sim_breakout"))
    game_key = pick("game", None)
    base = default_config(
        environment,
        game=str(game_key) if game_key is not None else None,
        episodes=int(pick("episodes", 100)),
        max_steps=int(pick("max_steps", 20000)),
        policy=str(pick("policy", "pct")),
        seed=int(pick("seed", 0)),
        workers=int(pick("workers", 1)),
        out_dir=pick("out_dir", None),
        dump_frames=pick("dump_frames", None),
        listen=pick("listen", None))
    histogram_bin = int(pick("histogram_bin", base.histogram_bin))

    hierarchy = base.hierarchy
    if parser.has_section("hierarchy"):
        sec = parser["hierarchy"]
        gains = (_parse_floats(sec["gains"]) if "gains" in sec
                 else hierarchy.gains)
        if len(gains) != 4:
            raise ValueError("gains must list exactly four levels")
        hierarchy = HierarchySpec(
            gains=(gains[0], gains[1], gains[2], gains[3]),
            top_reference=sec.getfloat("top_reference",
                                       hierarchy.top_reference),
            integrator_limit=sec.getint("integrator_limit",
                                        hierarchy.integrator_limit),
            press_scale=sec.getfloat("press_scale", hierarchy.press_scale),
            control_axis=hierarchy.control_axis)

    crop = base.crop
    layout = base.layout
    if parser.has_section("perception"):
        sec = parser["perception"]
        crop = CropConfig(
            top_row=sec.getint("top_row", crop.top_row),
            left_col=sec.getint("left_col", crop.left_col),
            crop_height=sec.getint("crop_height", crop.crop_height),
            crop_width=sec.getint("crop_width", crop.crop_width),
            binarize_threshold=sec.getint("threshold",
                                          crop.binarize_threshold))
        zone = (_parse_ints(sec["paddle_zone"]) if "paddle_zone" in sec
                else layout.paddle_zone)
        if len(zone) != 4:
            raise ValueError("paddle_zone must be min_row,min_col,max_row,max_col")
        layout = GameLayout(
            paddle_zone=(zone[0], zone[1], zone[2], zone[3]),
            control_axis=layout.control_axis,
            ball_area_min=sec.getint("ball_area_min", layout.ball_area_min),
            ball_area_max=sec.getint("ball_area_max", layout.ball_area_max),
            ball_aspect_max=sec.getfloat("ball_aspect_max",
                                         layout.ball_aspect_max),
            hold_ticks=sec.getint("hold_ticks", layout.hold_ticks),
            direction_deadband=sec.getfloat("direction_deadband",
                                            layout.direction_deadband))

    sim = base.sim
    if parser.has_section("sim"):
        sec = parser["sim"]
        sim = SimConfig(
            game=base.game,
            paddle_span=sec.getint("paddle_span", sim.paddle_span),
            paddle_thickness=sec.getint("paddle_thickness",
                                        sim.paddle_thickness),
            paddle_speed=sec.getfloat("paddle_speed", sim.paddle_speed),
            ball_speed=sec.getfloat("ball_speed", sim.ball_speed),
            brick_values=(_parse_ints(sec["brick_values"])
                          if "brick_values" in sec else sim.brick_values),
            opponent_speed_cap=sec.getfloat("opponent_speed_cap",
                                            sim.opponent_speed_cap),
            lives=sec.getint("lives", sim.lives),
            max_points=sec.getint("max_points", sim.max_points),
            frameskip=sec.getint("frameskip", sim.frameskip),
            seed=base.seed,
            serve_angle_max_deg=sec.getfloat("serve_angle_max_deg",
                                             sim.serve_angle_max_deg),
            bounce_lateral_max=sec.getfloat("bounce_lateral_max",
                                            sim.bounce_lateral_max),
            bounce_min_ratio=sec.getfloat("bounce_min_ratio",
                                          sim.bounce_min_ratio))

    return RunConfig(environment=base.environment, game=base.game,
                     episodes=base.episodes, max_steps=base.max_steps,
                     policy=base.policy, seed=base.seed, workers=base.workers,
                     histogram_bin=histogram_bin, out_dir=base.out_dir,
                     dump_frames=base.dump_frames, listen=base.listen,
                     hierarchy=hierarchy, crop=crop, layout=layout, sim=sim)
