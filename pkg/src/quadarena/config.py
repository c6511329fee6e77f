"""Runtime configuration: documented defaults, override validation, file I/O.

Every tunable lives in DEFAULTS under a dotted key. Overrides referencing an
unknown key are rejected, and the effective config can be dumped to a plain
``key = value`` text file that reloads to identical behavior.
"""

import math

__all__ = ["Config", "ConfigError", "DEFAULTS", "load_config_file", "parse_override"]


class ConfigError(ValueError):
    """Invalid task id, override key, or config file contents."""


# One flat namespace; values are float, int, bool or str. Reward scales for
# the collaborative tasks follow the benchmark's published table.
DEFAULTS = {
    # -- physics core ------------------------------------------------------
    "physics.dt": 0.02,                 # control step [s]
    "physics.substeps": 4,              # physics substeps per control step
    "physics.gravity": 9.81,
    "physics.solver_iters": 8,          # velocity impulse iterations
    "physics.position_iters": 4,        # non-penetration projection passes
    "physics.slop": 5e-4,               # tolerated residual overlap [m]
    "physics.baumgarte": 0.9,           # positional correction factor
    "physics.step_up": 0.15,            # max climbable support rise [m]
    "physics.fall_drop": 0.30,          # support drop that counts as a fall [m]
    "physics.body_z_tol": 0.40,         # bodies further apart in z never collide

    # -- robot body --------------------------------------------------------
    "robot.radius": 0.35,
    "robot.mass": 12.0,
    "robot.friction": 0.8,

    # -- locomotion / tracking controller ----------------------------------
    "locomotion.tau": 0.09,             # first-order tracking time constant [s]
    "locomotion.f_max_scale": 2.0,      # F_max = scale * m * g * mu
    "locomotion.max_vx": 1.5,
    "locomotion.max_vy": 1.0,
    "locomotion.max_yaw_rate": 2.0,
    "locomotion.topple_impulse": 25.0,  # windowed lateral impulse threshold [N s]
    "locomotion.topple_min_impulse": 2.0,  # per-contact impulse that counts [N s]
    "locomotion.impulse_window": 0.2,   # sliding window length [s]

    # -- objects -----------------------------------------------------------
    "box.half_extent": 0.4,
    "box.mass": 40.0,
    "box.friction": 0.6,
    "ball.radius": 0.12,
    "ball.mass": 0.45,
    "ball.friction": 0.1,
    "cylinder.radius": 0.5,
    "cylinder.mass": 25.0,
    "cylinder.friction": 0.4,

    # -- NPCs ---------------------------------------------------------------
    "sheep.radius": 0.25,
    "sheep.mass": 5.0,
    "sheep.sense_radius": 5.0,
    "sheep.k_repulse": 8.0,
    "sheep.k_cohere": 1.2,
    "sheep.noise_sigma": 0.6,
    "sheep.v_max": 1.8,
    "sheep.a_max": 6.0,
    "defender.speed": 1.2,
    "defender.arrive_tol": 0.05,

    # -- terrain defaults ---------------------------------------------------
    "terrain.gate_width": 0.8,
    "terrain.gate_width_push_box": 1.5,
    "terrain.gate_width_sheepdog": 1.0,
    "terrain.wall_height": 1.5,
    "terrain.platform_height": 1.0,
    "terrain.seesaw_half_len": 1.55,
    "terrain.seesaw_half_width": 0.45,
    "terrain.seesaw_pivot_height": 0.5,
    "terrain.seesaw_plank_mass": 12.0,
    "terrain.seesaw_damping": 6.0,
    "terrain.bridge_width": 0.45,
    "terrain.bridge_length": 4.0,
    "terrain.bridge_deck_height": 0.6,
    "terrain.sumo_ring_radius": 1.5,
    "terrain.sumo_platform_height": 0.6,
    "terrain.pitch_length": 10.0,
    "terrain.pitch_width": 6.0,
    "terrain.goal_width": 1.2,
    "terrain.goal_depth": 0.5,
    "terrain.door_gap": 1.75,
    "terrain.door_half_len": 0.75,
    "terrain.door_half_thickness": 0.06,
    "terrain.door_mass": 20.0,
    "terrain.door_damping": 2.0,

    # -- episodes ------------------------------------------------------------
    "episode.len_default": 500,
    "episode.len_football": 1000,

    # -- reward shaping shared constants -------------------------------------
    "reward.spacing_clip": 0.6,         # clip on inter-agent distance before squaring
    "reward.collision_clearance": 0.01, # robot-robot gap that counts as collision [m]
    "reward.gate_target_offset": 1.0,   # target point this far behind the gate [m]

    # -- per-task reward scales (collaborative scales follow the benchmark) --
    "reward.narrow_gate.gate_crossed": 5.0,
    "reward.narrow_gate.dist_to_target": 1.0,
    "reward.narrow_gate.agent_spacing": 0.025,
    "reward.narrow_gate.collision": -2.0,
    "reward.climb_seesaw.destination": 10.0,
    "reward.climb_seesaw.agent_height": 1.0,
    "reward.climb_seesaw.seesaw_progress": 5.0,
    "reward.climb_seesaw.seesaw_dist": -0.5,
    "reward.climb_seesaw.collision": -2.0,
    "reward.climb_seesaw.fall": -2.0,
    "reward.climb_seesaw.agent_spacing": 0.25,
    "reward.sheepdog_easy.sheep_crossed": 1.0,
    "reward.sheepdog_easy.sheep_dist": 2.0,
    "reward.sheepdog_hard.sheep_crossed": 1.0,
    "reward.sheepdog_hard.sheep_gate_prox": 1.0,
    "reward.push_box.box_crossed": 1.0,
    "reward.push_box.box_dist": 10.0,
    "reward.football_2v1.goal": 10.0,
    "reward.football_2v1.ball_goal_prox": 3.0,
    # competitive tasks: mirrored win bonus plus small zero-sum progress terms
    "reward.push_cylinder.win": 10.0,
    "reward.push_cylinder.cylinder_progress": 1.0,
    "reward.revolving_door.win": 10.0,
    "reward.revolving_door.progress_diff": 0.5,
    "reward.sumo.win": 10.0,
    "reward.sumo.ring_advantage": 0.5,
    "reward.traverse_bridge.win": 10.0,
    "reward.traverse_bridge.progress_diff": 0.5,
    "reward.football_1v1.goal": 10.0,
    "reward.football_1v1.ball_progress": 0.5,
    "reward.football_2v2.goal": 10.0,
    "reward.football_2v2.ball_progress": 0.5,
}


def _coerce(key, value, like):
    if isinstance(like, bool):
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false"):
            return value.lower() == "true"
        raise ConfigError(f"override {key!r}: expected bool, got {value!r}")
    if isinstance(like, int) and not isinstance(like, bool):
        try:
            f = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"override {key!r}: expected int, got {value!r}") from None
        if f != int(f):
            raise ConfigError(f"override {key!r}: expected int, got {value!r}")
        return int(f)
    if isinstance(like, float):
        try:
            f = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"override {key!r}: expected number, got {value!r}") from None
        if not math.isfinite(f):
            raise ConfigError(f"override {key!r}: non-finite value")
        return f
    return str(value)


class Config:
    """Immutable view over DEFAULTS plus validated overrides."""

    def __init__(self, overrides=None):
        data = dict(DEFAULTS)
        if overrides:
            for key, value in overrides.items():
                if key not in DEFAULTS:
                    close = [k for k in DEFAULTS if k.split(".")[-1] == key.split(".")[-1]]
                    hint = f" (did you mean one of {close}?)" if close else ""
                    raise ConfigError(f"unknown config key {key!r}{hint}")
                data[key] = _coerce(key, value, DEFAULTS[key])
        self._data = data

    def __getitem__(self, key):
        try:
            return self._data[key]
        except KeyError:
            raise ConfigError(f"unknown config key {key!r}") from None

    def get(self, key, default=None):
        return self._data.get(key, default)

    def items(self):
        return self._data.items()

    def overrides(self):
        """The subset of keys that differ from DEFAULTS."""
        return {k: v for k, v in self._data.items() if DEFAULTS[k] != v}

    def dump(self, path):
        """Write the effective config as a flat key = value document."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# quadarena effective config\n")
            for key in sorted(self._data):
                fh.write(f"{key} = {_format_value(self._data[key])}\n")

    def __eq__(self, other):
        return isinstance(other, Config) and self._data == other._data


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    return repr(value)


def parse_override(text):
    """Parse a single ``key=value`` override from the command line."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, _, raw = text.partition("=")
    return key.strip(), _parse_value(raw.strip())


def _parse_value(raw):
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def load_config_file(path):
    """Load a ``key = value`` document produced by Config.dump (or by hand)."""
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, raw = line.partition("=")
            overrides[key.strip()] = _parse_value(raw.strip())
    return overrides
