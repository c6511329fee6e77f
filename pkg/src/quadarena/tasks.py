"""The twelve benchmark tasks: rosters, arenas, observations, termination.

Six collaborative tasks (one team, shared reward) and six competitive tasks
(two teams, zero-sum). Each builder returns an immutable TaskSpec holding
the composed arena, body roster, spawn recipe, observation layout and the
geometry constants the reward/termination code reads.

Observation layout per agent: ego pose (x, y, cos yaw, sin yaw), ego world
velocity (2), ego yaw rate (1), then 4 numbers per dynamic entity (relative
position and relative velocity in the ego frame, fixed order: teammates,
opponents, NPCs, objects) and 2 per anchor (relative position only). No
proprioception is exposed: balance is delegated to the tracking layer.
"""

import math
from dataclasses import dataclass, field

from . import core
from .config import Config, ConfigError
from .npc import DefenderParams, SheepParams
from . import terrain as T

__all__ = ["TASK_IDS", "TaskSpec", "SpawnGroup", "build_task", "spaces",
           "layout_table"]

TASK_IDS = [
    "narrow_gate", "climb_seesaw", "sheepdog_easy", "sheepdog_hard",
    "push_box", "football_2v1",
    "push_cylinder", "revolving_door", "sumo", "traverse_bridge",
    "football_1v1", "football_2v2",
]

COLLABORATIVE = TASK_IDS[:6]


@dataclass(frozen=True)
class SpawnGroup:
    bodies: tuple          # body indices placed by this group
    rect: tuple            # (x0, y0, x1, y1)
    min_sep: float
    yaw: tuple             # ("fixed", v) | ("uniform", lo, hi) | ("face", x, y)


@dataclass(frozen=True)
class RewardTermSpec:
    name: str
    kind: str              # "state" | "change" | "event"
    scale: float
    clip: tuple = None     # applied to the raw measure before exponent/scale
    exponent: int = 1


@dataclass(frozen=True)
class TaskSpec:
    id: str
    cfg: Config
    arena: object
    bodies: tuple
    teams: tuple                 # tuple of tuples of agent body indices
    ctrl_map: tuple              # commanded bodies: agents then npc robots
    sheep_map: tuple
    door_body: int
    spawn_groups: tuple
    episode_len: int
    obs_layout: tuple            # per agent: tuple of slot refs
    reward_terms: tuple          # RewardTermSpec, team-0 perspective
    geom: dict                   # task geometry constants for rewards/termination
    defender: object = None     # DefenderParams when a defender NPC exists
    sheep_params: object = None

    @property
    def n_agents(self):
        return sum(len(t) for t in self.teams)

    @property
    def collaborative(self):
        return len(self.teams) == 1

    def team_of(self, agent):
        for ti, team in enumerate(self.teams):
            if agent in team:
                return ti
        raise KeyError(agent)

    @property
    def obs_dim(self):
        return _layout_dim(self.obs_layout[0])

    @property
    def privileged_extra_dim(self):
        return 7 * len(self.bodies) + (2 if self.arena.seesaw is not None else 0)


def _layout_dim(layout):
    dim = 0
    for slot in layout:
        dim += 7 if slot[0] == "ego" else (2 if slot[0] == "anchor" else 4)
    return dim


# --------------------------------------------------------------------------
# roster helpers
# --------------------------------------------------------------------------

def _robot(cfg, name, cls=core.CLASS_AGENT):
    return core.Body(name, ("disc", cfg["robot.radius"]), cfg["robot.mass"],
                     cfg["robot.friction"], cls)


def _sheep_body(cfg, i):
    return core.Body(f"sheep{i}", ("disc", cfg["sheep.radius"]),
                     cfg["sheep.mass"], 0.5, core.CLASS_SHEEP)


def _gate_blocks(cfg, gate_width, flat=(4.0, 6.0), wall=(1.0, 6.0)):
    return [T.Flat(flat),
            T.WallWithGate(gate_width, 0.0, wall, cfg["terrain.wall_height"]),
            T.Flat((4.0, flat[1]))]


def _pitch(cfg):
    return T.FootballPitch(
        (cfg["terrain.pitch_length"] + 2 * cfg["terrain.goal_depth"] + 0.0,
         cfg["terrain.pitch_width"]),
        cfg["terrain.goal_width"], cfg["terrain.goal_depth"])


def _r(cfg):
    return cfg["robot.radius"]


def _sep(cfg):
    return 2.5 * cfg["robot.radius"]


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------

def build_task(task_id, cfg=None):
    cfg = cfg or Config()
    try:
        builder = _BUILDERS[task_id]
    except KeyError:
        raise ConfigError(
            f"unknown task {task_id!r}; valid ids: {', '.join(TASK_IDS)}") from None
    return builder(cfg)


def _narrow_gate(cfg):
    arena = T.compose_track(_gate_blocks(cfg, cfg["terrain.gate_width"]))
    gate = arena.anchor("gate_center")
    target = (gate[0] + cfg["reward.gate_target_offset"], gate[1])
    bodies = (_robot(cfg, "agent0"), _robot(cfg, "agent1"))
    layout = _mk_layouts(2, [("ent", "mate")], [("anchor", gate)])
    terms = (
        RewardTermSpec("gate_crossed", "event", cfg["reward.narrow_gate.gate_crossed"]),
        RewardTermSpec("dist_to_target", "change", cfg["reward.narrow_gate.dist_to_target"]),
        RewardTermSpec("agent_spacing", "state", cfg["reward.narrow_gate.agent_spacing"],
                       clip=(0.0, cfg["reward.spacing_clip"]), exponent=2),
        RewardTermSpec("collision", "event", cfg["reward.narrow_gate.collision"]),
    )
    return TaskSpec(
        id="narrow_gate", cfg=cfg, arena=arena, bodies=bodies,
        teams=((0, 1),), ctrl_map=(0, 1), sheep_map=(), door_body=-1,
        spawn_groups=(SpawnGroup((0, 1), (1.2, -1.6, 3.0, 1.6), _sep(cfg),
                                 ("uniform", -math.pi / 3, math.pi / 3)),),
        episode_len=cfg["episode.len_default"],
        obs_layout=layout, reward_terms=terms,
        geom={"gate_x": gate[0], "gate_center": gate, "target": target,
              "collision_pair": (0, 1)})


def _climb_seesaw(cfg):
    blocks = [T.Flat((3.0, 4.0)),
              T.SeesawBlock(cfg["terrain.seesaw_half_len"],
                            cfg["terrain.seesaw_half_width"],
                            cfg["terrain.seesaw_pivot_height"],
                            cfg["terrain.seesaw_plank_mass"],
                            cfg["terrain.seesaw_damping"]),
              T.Platform(cfg["terrain.platform_height"], (3.0, 4.0))]
    arena = T.compose_track(blocks)
    entry = arena.anchor("plank_entry")
    top = arena.anchor("plank_top")
    dest = arena.anchor("platform_center")
    bodies = (_robot(cfg, "agent0"), _robot(cfg, "agent1"))
    layout = _mk_layouts(2, [("ent", "mate"), ("plank_tip",)],
                         [("anchor", entry), ("anchor", dest)])
    terms = (
        RewardTermSpec("destination", "event", cfg["reward.climb_seesaw.destination"]),
        RewardTermSpec("agent_height", "state", cfg["reward.climb_seesaw.agent_height"]),
        RewardTermSpec("seesaw_progress", "change", cfg["reward.climb_seesaw.seesaw_progress"]),
        RewardTermSpec("seesaw_dist", "state", cfg["reward.climb_seesaw.seesaw_dist"],
                       exponent=2),
        RewardTermSpec("collision", "event", cfg["reward.climb_seesaw.collision"]),
        RewardTermSpec("fall", "event", cfg["reward.climb_seesaw.fall"]),
        RewardTermSpec("agent_spacing", "state", cfg["reward.climb_seesaw.agent_spacing"],
                       clip=(0.0, cfg["reward.spacing_clip"]), exponent=2),
    )
    ss = arena.seesaw
    platform_x0 = blocks[0].extent[0] + blocks[1].extent[0]
    return TaskSpec(
        id="climb_seesaw", cfg=cfg, arena=arena, bodies=bodies,
        teams=((0, 1),), ctrl_map=(0, 1), sheep_map=(), door_body=-1,
        spawn_groups=(SpawnGroup((0, 1), (0.6, -1.4, 2.4, 1.4), _sep(cfg),
                                 ("uniform", -math.pi / 3, math.pi / 3)),),
        episode_len=cfg["episode.len_default"],
        obs_layout=layout, reward_terms=terms,
        geom={"plank_x0": entry[0], "plank_x1": top[0], "plank_y": entry[1],
              "dest_x0": platform_x0 + 0.3,
              "dest_z": cfg["terrain.platform_height"] - 0.1,
              "collision_pair": (0, 1), "pivot": ss.pivot,
              "platform_h": cfg["terrain.platform_height"]})


def _sheepdog(cfg, n_sheep, task_id):
    arena = T.compose_track(_gate_blocks(
        cfg, cfg["terrain.gate_width_sheepdog"], flat=(5.0, 7.0), wall=(1.0, 7.0)))
    gate = arena.anchor("gate_center")
    bodies = [_robot(cfg, "agent0"), _robot(cfg, "agent1")]
    sheep_map = []
    for i in range(n_sheep):
        sheep_map.append(len(bodies))
        bodies.append(_sheep_body(cfg, i))
    ent_refs = [("ent", "mate")] + [("ent", b) for b in sheep_map]
    layout = _mk_layouts(2, ent_refs, [("anchor", gate)])
    if task_id == "sheepdog_easy":
        terms = (
            RewardTermSpec("sheep_crossed", "event", cfg["reward.sheepdog_easy.sheep_crossed"]),
            RewardTermSpec("sheep_dist", "change", cfg["reward.sheepdog_easy.sheep_dist"]),
        )
    else:
        terms = (
            RewardTermSpec("sheep_crossed", "event", cfg["reward.sheepdog_hard.sheep_crossed"]),
            RewardTermSpec("sheep_gate_prox", "state", cfg["reward.sheepdog_hard.sheep_gate_prox"]),
        )
    sheep_rect = (3.0, -1.0, 4.2, 1.0) if n_sheep == 1 else (2.8, -1.8, 4.6, 1.8)
    return TaskSpec(
        id=task_id, cfg=cfg, arena=arena, bodies=tuple(bodies),
        teams=((0, 1),), ctrl_map=(0, 1), sheep_map=tuple(sheep_map),
        door_body=-1,
        spawn_groups=(
            SpawnGroup((0, 1), (0.8, -2.0, 2.2, 2.0), _sep(cfg),
                       ("uniform", -math.pi / 3, math.pi / 3)),
            SpawnGroup(tuple(sheep_map), sheep_rect, 2.0 * cfg["sheep.radius"],
                       ("uniform", -math.pi, math.pi)),
        ),
        episode_len=cfg["episode.len_default"],
        obs_layout=layout, reward_terms=terms,
        geom={"gate_x": gate[0], "gate_center": gate},
        sheep_params=SheepParams.from_config(cfg))


def _push_box(cfg):
    arena = T.compose_track(_gate_blocks(cfg, cfg["terrain.gate_width_push_box"]))
    gate = arena.anchor("gate_center")
    half = cfg["box.half_extent"]
    bodies = (_robot(cfg, "agent0"), _robot(cfg, "agent1"),
              core.Body("box", ("rect", half, half), cfg["box.mass"],
                        cfg["box.friction"], core.CLASS_OBJECT))
    layout = _mk_layouts(2, [("ent", "mate"), ("ent", 2)], [("anchor", gate)])
    terms = (
        RewardTermSpec("box_crossed", "event", cfg["reward.push_box.box_crossed"]),
        RewardTermSpec("box_dist", "change", cfg["reward.push_box.box_dist"]),
    )
    return TaskSpec(
        id="push_box", cfg=cfg, arena=arena, bodies=bodies,
        teams=((0, 1),), ctrl_map=(0, 1), sheep_map=(), door_body=-1,
        spawn_groups=(
            SpawnGroup((0, 1), (0.8, -1.8, 2.2, 1.8), _sep(cfg),
                       ("uniform", -math.pi / 3, math.pi / 3)),
            SpawnGroup((2,), (3.0, -0.3, 3.4, 0.3), 0.0, ("fixed", 0.0)),
        ),
        episode_len=cfg["episode.len_default"],
        obs_layout=layout, reward_terms=terms,
        geom={"gate_x": gate[0], "gate_center": gate, "box": 2})


def _football_2v1(cfg):
    arena = T.compose_track([_pitch(cfg)])
    goal_e = arena.anchor("goal_east")
    bodies = (_robot(cfg, "agent0"), _robot(cfg, "agent1"),
              _robot(cfg, "defender", core.CLASS_NPC_ROBOT),
              core.Body("ball", ("disc", cfg["ball.radius"]), cfg["ball.mass"],
                        cfg["ball.friction"], core.CLASS_OBJECT))
    layout = _mk_layouts(2, [("ent", "mate"), ("ent", 2), ("ent", 3)],
                         [("anchor", goal_e)])
    terms = (
        RewardTermSpec("goal", "event", cfg["reward.football_2v1.goal"]),
        RewardTermSpec("ball_goal_prox", "state", cfg["reward.football_2v1.ball_goal_prox"]),
    )
    return TaskSpec(
        id="football_2v1", cfg=cfg, arena=arena, bodies=bodies,
        teams=((0, 1),), ctrl_map=(0, 1, 2), sheep_map=(), door_body=-1,
        spawn_groups=(
            SpawnGroup((0, 1), (1.5, -2.0, 3.0, 2.0), _sep(cfg), ("fixed", 0.0)),
            SpawnGroup((3,), (4.2, -0.5, 4.8, 0.5), 0.0, ("fixed", 0.0)),
            SpawnGroup((2,), (8.0, -0.3, 8.4, 0.3), 0.0, ("fixed", math.pi)),
        ),
        episode_len=cfg["episode.len_football"],
        obs_layout=layout, reward_terms=terms,
        geom={"goal_lines": (arena.anchor("goal_west")[0], goal_e[0]),
              "goal_half_width": cfg["terrain.goal_width"] / 2.0,
              "goal_east": goal_e, "goal_west": arena.anchor("goal_west"),
              "ball": 3, "attack_goal": (1,)},   # team 0 attacks east (index 1)
        defender=DefenderParams(cfg["defender.speed"], goal_e,
                                cfg["defender.arrive_tol"]))


def _push_cylinder(cfg):
    arena = T.compose_track([T.WalledArena((7.0, 7.0))])
    cx = 3.5
    bodies = (_robot(cfg, "agent0"), _robot(cfg, "agent1"),
              core.Body("cylinder", ("disc", cfg["cylinder.radius"]),
                        cfg["cylinder.mass"], cfg["cylinder.friction"],
                        core.CLASS_OBJECT))
    east = (6.8, 0.0)
    west = (0.2, 0.0)
    layout = (
        (("ego",), ("ent", 1), ("ent", 2), ("anchor", east)),
        (("ego",), ("ent", 0), ("ent", 2), ("anchor", west)),
    )
    terms = (
        RewardTermSpec("win", "event", cfg["reward.push_cylinder.win"]),
        RewardTermSpec("cylinder_progress", "change",
                       cfg["reward.push_cylinder.cylinder_progress"]),
    )
    return TaskSpec(
        id="push_cylinder", cfg=cfg, arena=arena, bodies=bodies,
        teams=((0,), (1,)), ctrl_map=(0, 1), sheep_map=(), door_body=-1,
        spawn_groups=(
            SpawnGroup((0,), (0.8, -0.4, 1.4, 0.4), 0.0, ("fixed", 0.0)),
            SpawnGroup((1,), (5.6, -0.4, 6.2, 0.4), 0.0, ("fixed", math.pi)),
            SpawnGroup((2,), (cx, 0.0, cx, 0.0), 0.0, ("fixed", 0.0)),
        ),
        episode_len=cfg["episode.len_default"],
        obs_layout=layout, reward_terms=terms,
        geom={"cyl": 2, "center_x": cx, "win_margin": 2.2})


def _revolving_door(cfg):
    arena = T.compose_track([
        T.Flat((3.5, 5.0)),
        T.WallWithGate(cfg["terrain.door_gap"], 0.0, (1.0, 5.0),
                       cfg["terrain.wall_height"]),
        T.Flat((3.5, 5.0))])
    gate = arena.anchor("gate_center")
    hl = cfg["terrain.door_half_len"]
    ht = cfg["terrain.door_half_thickness"]
    dm = cfg["terrain.door_mass"]
    inertia = dm * ((2 * hl) ** 2 + (2 * ht) ** 2) / 12.0
    bodies = (_robot(cfg, "agent0"), _robot(cfg, "agent1"),
              core.Body("door", ("rect", hl, ht), math.inf, 0.3,
                        core.CLASS_PINNED, pinned_inertia=inertia))
    exit_pt = (gate[0] + 2.0, gate[1])
    layout = (
        (("ego",), ("ent", 1), ("door_tip",), ("anchor", gate), ("anchor", exit_pt)),
        (("ego",), ("ent", 0), ("door_tip",), ("anchor", gate), ("anchor", exit_pt)),
    )
    terms = (
        RewardTermSpec("win", "event", cfg["reward.revolving_door.win"]),
        RewardTermSpec("progress_diff", "change",
                       cfg["reward.revolving_door.progress_diff"]),
    )
    return TaskSpec(
        id="revolving_door", cfg=cfg, arena=arena, bodies=bodies,
        teams=((0,), (1,)), ctrl_map=(0, 1), sheep_map=(), door_body=2,
        spawn_groups=(
            SpawnGroup((0, 1), (0.8, -1.8, 2.6, 1.8), _sep(cfg),
                       ("uniform", -math.pi / 3, math.pi / 3)),
            SpawnGroup((2,), (gate[0], gate[1], gate[0], gate[1]), 0.0,
                       ("fixed", math.pi / 2)),
        ),
        episode_len=cfg["episode.len_default"],
        obs_layout=layout, reward_terms=terms,
        geom={"door": 2, "gate_x": gate[0], "exit_x": gate[0] + 0.6})


def _sumo(cfg):
    arena = T.compose_track([T.SumoRing(cfg["terrain.sumo_ring_radius"],
                                        cfg["terrain.sumo_platform_height"],
                                        (6.0, 6.0))])
    center = arena.anchor("ring_center")
    bodies = (_robot(cfg, "agent0"), _robot(cfg, "agent1"))
    layout = (
        (("ego",), ("ent", 1), ("anchor", center)),
        (("ego",), ("ent", 0), ("anchor", center)),
    )
    terms = (
        RewardTermSpec("win", "event", cfg["reward.sumo.win"]),
        RewardTermSpec("ring_advantage", "change", cfg["reward.sumo.ring_advantage"]),
    )
    return TaskSpec(
        id="sumo", cfg=cfg, arena=arena, bodies=bodies,
        teams=((0,), (1,)), ctrl_map=(0, 1), sheep_map=(), door_body=-1,
        spawn_groups=(
            SpawnGroup((0,), (2.1, -0.1, 2.3, 0.1), 0.0, ("fixed", 0.0)),
            SpawnGroup((1,), (3.7, -0.1, 3.9, 0.1), 0.0, ("fixed", math.pi)),
        ),
        episode_len=cfg["episode.len_default"],
        obs_layout=layout, reward_terms=terms,
        geom={"ring_center": center, "ring_radius": cfg["terrain.sumo_ring_radius"]})


def _traverse_bridge(cfg):
    arena = T.compose_track([
        T.Platform(cfg["terrain.bridge_deck_height"], (2.5, 3.0), name="west"),
        T.Bridge(cfg["terrain.bridge_width"], cfg["terrain.bridge_length"],
                 cfg["terrain.bridge_deck_height"],
                 (cfg["terrain.bridge_length"], 3.0)),
        T.Platform(cfg["terrain.bridge_deck_height"], (2.5, 3.0), name="east")])
    west = arena.anchor("west.platform_center")
    east = arena.anchor("east.platform_center")
    bodies = (_robot(cfg, "agent0"), _robot(cfg, "agent1"))
    layout = (
        (("ego",), ("ent", 1), ("anchor", east)),
        (("ego",), ("ent", 0), ("anchor", west)),
    )
    terms = (
        RewardTermSpec("win", "event", cfg["reward.traverse_bridge.win"]),
        RewardTermSpec("progress_diff", "change",
                       cfg["reward.traverse_bridge.progress_diff"]),
    )
    east_x0 = 2.5 + cfg["terrain.bridge_length"]
    return TaskSpec(
        id="traverse_bridge", cfg=cfg, arena=arena, bodies=bodies,
        teams=((0,), (1,)), ctrl_map=(0, 1), sheep_map=(), door_body=-1,
        spawn_groups=(
            SpawnGroup((0,), (0.8, -0.2, 1.4, 0.2), 0.0, ("fixed", 0.0)),
            SpawnGroup((1,), (east_x0 + 1.1, -0.2, east_x0 + 1.7, 0.2), 0.0,
                       ("fixed", math.pi)),
        ),
        episode_len=cfg["episode.len_default"],
        obs_layout=layout, reward_terms=terms,
        geom={"goal0_x": east_x0 + 0.5, "goal1_x": 2.5 - 0.5,
              "deck_h": cfg["terrain.bridge_deck_height"]})


def _football_vs(cfg, per_team, task_id):
    arena = T.compose_track([_pitch(cfg)])
    goal_w = arena.anchor("goal_west")
    goal_e = arena.anchor("goal_east")
    center = arena.anchor("pitch_center")
    bodies = []
    team0 = tuple(range(per_team))
    team1 = tuple(range(per_team, 2 * per_team))
    for i in range(2 * per_team):
        bodies.append(_robot(cfg, f"agent{i}"))
    ball = len(bodies)
    bodies.append(core.Body("ball", ("disc", cfg["ball.radius"]),
                            cfg["ball.mass"], cfg["ball.friction"],
                            core.CLASS_OBJECT))
    layouts = []
    for a in range(2 * per_team):
        mine = team0 if a in team0 else team1
        other = team1 if a in team0 else team0
        goal = goal_e if a in team0 else goal_w
        slots = [("ego",)]
        slots += [("ent", m) for m in mine if m != a]
        slots += [("ent", o) for o in other]
        slots += [("ent", ball), ("anchor", goal)]
        layouts.append(tuple(slots))
    scale_goal = cfg[f"reward.{task_id}.goal"]
    scale_prog = cfg[f"reward.{task_id}.ball_progress"]
    terms = (
        RewardTermSpec("goal", "event", scale_goal),
        RewardTermSpec("ball_progress", "change", scale_prog),
    )
    groups = [
        SpawnGroup(team0, (1.5, -2.0, 3.0, 2.0), _sep(cfg), ("fixed", 0.0)),
        SpawnGroup(team1, (8.0, -2.0, 9.5, 2.0), _sep(cfg), ("fixed", math.pi)),
        SpawnGroup((ball,), (center[0] - 0.2, -0.2, center[0] + 0.2, 0.2), 0.0,
                   ("fixed", 0.0)),
    ]
    return TaskSpec(
        id=task_id, cfg=cfg, arena=arena, bodies=tuple(bodies),
        teams=(team0, team1), ctrl_map=tuple(range(2 * per_team)),
        sheep_map=(), door_body=-1,
        spawn_groups=tuple(groups),
        episode_len=cfg["episode.len_football"],
        obs_layout=tuple(layouts), reward_terms=terms,
        geom={"goal_lines": (goal_w[0], goal_e[0]),
              "goal_half_width": cfg["terrain.goal_width"] / 2.0,
              "goal_east": goal_e, "goal_west": goal_w, "ball": ball})


_BUILDERS = {
    "narrow_gate": _narrow_gate,
    "climb_seesaw": _climb_seesaw,
    "sheepdog_easy": lambda cfg: _sheepdog(cfg, 1, "sheepdog_easy"),
    "sheepdog_hard": lambda cfg: _sheepdog(cfg, 9, "sheepdog_hard"),
    "push_box": _push_box,
    "football_2v1": _football_2v1,
    "push_cylinder": _push_cylinder,
    "revolving_door": _revolving_door,
    "sumo": _sumo,
    "traverse_bridge": _traverse_bridge,
    "football_1v1": lambda cfg: _football_vs(cfg, 1, "football_1v1"),
    "football_2v2": lambda cfg: _football_vs(cfg, 2, "football_2v2"),
}


def _mk_layouts(n_agents, ent_refs, anchor_refs):
    """Symmetric collaborative layouts; 'mate' expands per agent."""
    layouts = []
    for a in range(n_agents):
        slots = [("ego",)]
        for ref in ent_refs:
            if ref == ("ent", "mate"):
                for other in range(n_agents):
                    if other != a:
                        slots.append(("ent", other))
            else:
                slots.append(ref)
        slots.extend(anchor_refs)
        layouts.append(tuple(slots))
    return tuple(layouts)


# --------------------------------------------------------------------------
# spaces and documentation
# --------------------------------------------------------------------------

def build_observation(task, sim, env_index, agent):
    """One agent's observation vector from a single env's state."""
    import numpy as np

    from . import obs as obs_mod
    if agent < 0 or agent >= task.n_agents:
        raise KeyError(f"unknown agent {agent}")
    buf = np.zeros((sim.n_envs, task.n_agents, task.obs_dim))
    obs_mod.build_obs(task, sim, buf, idx=np.array([env_index]))
    return buf[env_index, agent].copy()


def spaces(task):
    """Array-shape metadata for a task (constant for its lifetime)."""
    cfg = task.cfg
    return {
        "task": task.id,
        "n_agents": task.n_agents,
        "n_teams": len(task.teams),
        "teams": [list(t) for t in task.teams],
        "obs_dim": task.obs_dim,
        "privileged_obs_dim": task.obs_dim + task.privileged_extra_dim,
        "action_dim": 3,
        "action_low": [-cfg["locomotion.max_vx"], -cfg["locomotion.max_vy"],
                       -cfg["locomotion.max_yaw_rate"]],
        "action_high": [cfg["locomotion.max_vx"], cfg["locomotion.max_vy"],
                        cfg["locomotion.max_yaw_rate"]],
        "episode_len": task.episode_len,
        "n_bodies": len(task.bodies),
    }


def slot_names(task, agent):
    """Human-readable labels for each observation slot of an agent."""
    names = []
    for slot in task.obs_layout[agent]:
        if slot[0] == "ego":
            names += ["ego_x", "ego_y", "ego_cos_yaw", "ego_sin_yaw",
                      "ego_vx", "ego_vy", "ego_yaw_rate"]
        elif slot[0] == "ent":
            label = task.bodies[slot[1]].name
            names += [f"{label}_rel_{c}" for c in ("x", "y", "vx", "vy")]
        elif slot[0] == "plank_tip":
            names += [f"plank_tip_rel_{c}" for c in ("x", "y", "vx", "vy")]
        elif slot[0] == "door_tip":
            names += [f"door_tip_rel_{c}" for c in ("x", "y", "vx", "vy")]
        else:
            ax, ay = slot[1]
            names += [f"anchor({ax:.2f},{ay:.2f})_rel_x",
                      f"anchor({ax:.2f},{ay:.2f})_rel_y"]
    return names


def layout_table(cfg=None):
    """Machine-readable observation layout for every task."""
    cfg = cfg or Config()
    table = {}
    for tid in TASK_IDS:
        task = build_task(tid, cfg)
        table[tid] = {
            "obs_dim": task.obs_dim,
            "privileged_obs_dim": task.obs_dim + task.privileged_extra_dim,
            "agents": {str(a): slot_names(task, a) for a in range(task.n_agents)},
            "reward_terms": [
                {"name": t.name, "kind": t.kind, "scale": t.scale,
                 "clip": list(t.clip) if t.clip else None, "exponent": t.exponent}
                for t in task.reward_terms],
        }
    return table
