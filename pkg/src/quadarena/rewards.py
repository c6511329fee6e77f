"""Reward computation and termination for every task, over batch arrays.

Terms come in three kinds. "state" terms are paid every step from the
current state; "change" terms pay the per-step delta of a measured quantity
and telescope over an episode; "event" terms fire on latched transitions
(crossings, destination arrival, collisions, falls, wins). All measures are
functions of recorded body states only, so an independent single-pass oracle
can recompute every reward from a trajectory dump (see oracle.py).

Collaborative tasks pay every agent the team total; competitive tasks pay
team 1 the exact negation of team 0 (zero-sum by construction).

Float discipline: distances use sqrt on scalars/arrays (correctly rounded),
exponentials use math.exp in explicit loops, and per-entity sums accumulate
in entity order, so oracle recomputation is bit-identical, not just close.
"""

import math

import numpy as np

__all__ = ["RewardState", "compute_rewards", "check_termination",
           "OUTCOME_NONE", "OUTCOME_SUCCESS", "OUTCOME_TIMEOUT",
           "OUTCOME_FAILED", "OUTCOME_TEAM0", "OUTCOME_TEAM1", "OUTCOME_DRAW",
           "OUTCOME_LABELS"]

OUTCOME_NONE = 0
OUTCOME_SUCCESS = 1
OUTCOME_TIMEOUT = 2
OUTCOME_FAILED = 3
OUTCOME_TEAM0 = 4
OUTCOME_TEAM1 = 5
OUTCOME_DRAW = 6

OUTCOME_LABELS = {
    OUTCOME_NONE: None,
    OUTCOME_SUCCESS: "success",
    OUTCOME_TIMEOUT: "timeout",
    OUTCOME_FAILED: "failed",
    OUTCOME_TEAM0: "team_0",
    OUTCOME_TEAM1: "team_1",
    OUTCOME_DRAW: "draw",
}


class RewardState:
    """Per-batch event latches; row e resets with its environment."""

    def __init__(self, task, n_envs):
        E = n_envs
        self.task = task
        A = task.n_agents
        self.crossed = np.zeros((E, A), dtype=bool)
        self.dest = np.zeros((E, A), dtype=bool)
        self.contact = np.zeros(E, dtype=bool)
        ns = len(task.sheep_map)
        self.sheep_crossed = np.zeros((E, max(1, ns)), dtype=bool)
        self.box_crossed = np.zeros(E, dtype=bool)
        # transient, valid after compute_rewards for the step just taken
        self.winner = np.full(E, -1, dtype=np.int8)
        self.success = np.zeros(E, dtype=bool)

    def reset_env(self, e):
        self.crossed[e] = False
        self.dest[e] = False
        self.contact[e] = False
        self.sheep_crossed[e] = False
        self.box_crossed[e] = False
        self.winner[e] = -1
        self.success[e] = False


def _dist(ax, ay, bx, by):
    dx = ax - bx
    dy = ay - by
    return np.sqrt(dx * dx + dy * dy)


def _exp_neg(arr):
    """exp(-x) elementwise via math.exp (bitwise-stable vs the oracle)."""
    flat = arr.ravel()
    out = np.empty_like(flat)
    for i in range(flat.shape[0]):
        out[i] = math.exp(-flat[i])
    return out.reshape(arr.shape)


def _collision_onset(task, prev, cur, rs):
    a, b = task.geom["collision_pair"]
    r = task.cfg["robot.radius"]
    thresh = 2.0 * r + task.cfg["reward.collision_clearance"]
    d = _dist(cur.pos[:, a, 0], cur.pos[:, a, 1],
              cur.pos[:, b, 0], cur.pos[:, b, 1])
    touching = d < thresh
    onset = touching & ~rs.contact
    rs.contact = touching
    return onset


def compute_rewards(task, prev, cur, rs):
    """Per-agent rewards for the transition prev->cur.

    Returns (rewards[E, A], term_values dict name -> [E] team-0 values) and
    updates latches, rs.winner and rs.success in place.
    """
    fn = _TASK_REWARDS[task.id]
    terms = fn(task, prev, cur, rs)
    E = cur.pos.shape[0]
    total = np.zeros(E)
    scales = {t.name: t.scale for t in task.reward_terms}
    values = {}
    for spec in task.reward_terms:
        v = terms[spec.name] * scales[spec.name]
        values[spec.name] = v
        total = total + v
    rewards = np.zeros((E, task.n_agents))
    if task.collaborative:
        for a in range(task.n_agents):
            rewards[:, a] = total
    else:
        for a in task.teams[0]:
            rewards[:, a] = total
        for a in task.teams[1]:
            rewards[:, a] = -total
    return rewards, values


# --------------------------------------------------------------------------
# per-task raw term measures (unscaled)
# --------------------------------------------------------------------------

def _crossing_events(rs_latch, prev_x, cur_x, gate_x):
    ev = (~rs_latch) & (prev_x <= gate_x) & (cur_x > gate_x)
    rs_latch |= ev
    return ev


def _spacing(task, cur, spec):
    a, b = task.geom["collision_pair"]
    d = _dist(cur.pos[:, a, 0], cur.pos[:, a, 1],
              cur.pos[:, b, 0], cur.pos[:, b, 1])
    c = np.minimum(d, spec.clip[1])
    return c * c


def _narrow_gate(task, prev, cur, rs):
    g = task.geom
    gx = g["gate_x"]
    tx, ty = g["target"]
    ev0 = _crossing_events(rs.crossed[:, 0], prev.pos[:, 0, 0], cur.pos[:, 0, 0], gx)
    ev1 = _crossing_events(rs.crossed[:, 1], prev.pos[:, 1, 0], cur.pos[:, 1, 0], gx)
    d0p = _dist(prev.pos[:, 0, 0], prev.pos[:, 0, 1], tx, ty)
    d0c = _dist(cur.pos[:, 0, 0], cur.pos[:, 0, 1], tx, ty)
    d1p = _dist(prev.pos[:, 1, 0], prev.pos[:, 1, 1], tx, ty)
    d1c = _dist(cur.pos[:, 1, 0], cur.pos[:, 1, 1], tx, ty)
    spec = {t.name: t for t in task.reward_terms}
    onset = _collision_onset(task, prev, cur, rs)
    rs.success = rs.crossed[:, 0] & rs.crossed[:, 1]
    return {
        "gate_crossed": ev0.astype(np.float64) + ev1.astype(np.float64),
        "dist_to_target": (d0p - d0c) + (d1p - d1c),
        "agent_spacing": _spacing(task, cur, spec["agent_spacing"]),
        "collision": onset.astype(np.float64),
    }


def _seg_dist(px, py, x0, y0, x1, y1):
    """Distance from points to the segment (x0,y0)-(x1,y1); scalar consts."""
    ux, uy = x1 - x0, y1 - y0
    ll = ux * ux + uy * uy
    t = ((px - x0) * ux + (py - y0) * uy) / ll
    t = np.clip(t, 0.0, 1.0)
    qx = x0 + t * ux
    qy = y0 + t * uy
    return _dist(px, py, qx, qy)


def _climb_seesaw(task, prev, cur, rs):
    g = task.geom
    x0, x1, py = g["plank_x0"], g["plank_x1"], g["plank_y"]
    dest_ev = np.zeros(cur.pos.shape[0])
    for a in range(2):
        at_dest = (cur.pos[:, a, 0] > g["dest_x0"]) & (cur.z[:, a] > g["dest_z"])
        ev = at_dest & ~rs.dest[:, a]
        rs.dest[:, a] |= ev
        dest_ev = dest_ev + ev.astype(np.float64)
    height = cur.z[:, 0] + cur.z[:, 1]
    p0p = np.clip(prev.pos[:, 0, 0], x0, x1)
    p0c = np.clip(cur.pos[:, 0, 0], x0, x1)
    p1p = np.clip(prev.pos[:, 1, 0], x0, x1)
    p1c = np.clip(cur.pos[:, 1, 0], x0, x1)
    sd0 = _seg_dist(cur.pos[:, 0, 0], cur.pos[:, 0, 1], x0, py, x1, py)
    sd1 = _seg_dist(cur.pos[:, 1, 0], cur.pos[:, 1, 1], x0, py, x1, py)
    fall_ev = ((cur.fallen[:, 0] & ~prev.fallen[:, 0]).astype(np.float64)
               + (cur.fallen[:, 1] & ~prev.fallen[:, 1]).astype(np.float64))
    spec = {t.name: t for t in task.reward_terms}
    onset = _collision_onset(task, prev, cur, rs)
    rs.success = rs.dest[:, 0] | rs.dest[:, 1]
    return {
        "destination": dest_ev,
        "agent_height": height,
        "seesaw_progress": (p0c - p0p) + (p1c - p1p),
        "seesaw_dist": sd0 * sd0 + sd1 * sd1,
        "collision": onset.astype(np.float64),
        "fall": fall_ev,
        "agent_spacing": _spacing(task, cur, spec["agent_spacing"]),
    }


def _sheepdog_easy(task, prev, cur, rs):
    g = task.geom
    gx, gy = g["gate_center"]
    s = task.sheep_map[0]
    ev = _crossing_events(rs.sheep_crossed[:, 0], prev.pos[:, s, 0],
                          cur.pos[:, s, 0], g["gate_x"])
    dp = _dist(prev.pos[:, s, 0], prev.pos[:, s, 1], gx, gy)
    dc = _dist(cur.pos[:, s, 0], cur.pos[:, s, 1], gx, gy)
    rs.success = rs.sheep_crossed[:, 0].copy()
    return {"sheep_crossed": ev.astype(np.float64), "sheep_dist": dp - dc}


def _sheepdog_hard(task, prev, cur, rs):
    g = task.geom
    gx, gy = g["gate_center"]
    E = cur.pos.shape[0]
    count = np.zeros(E)
    prox = np.zeros(E)
    for k, s in enumerate(task.sheep_map):
        ev = _crossing_events(rs.sheep_crossed[:, k], prev.pos[:, s, 0],
                              cur.pos[:, s, 0], g["gate_x"])
        count = count + ev.astype(np.float64)
        d = _dist(cur.pos[:, s, 0], cur.pos[:, s, 1], gx, gy)
        prox = prox + _exp_neg(d)
    rs.success = rs.sheep_crossed.all(axis=1)
    return {"sheep_crossed": count, "sheep_gate_prox": prox}


def _push_box(task, prev, cur, rs):
    g = task.geom
    gx, gy = g["gate_center"]
    bx = g["box"]
    ev = _crossing_events(rs.box_crossed, prev.pos[:, bx, 0],
                          cur.pos[:, bx, 0], g["gate_x"])
    dp = _dist(prev.pos[:, bx, 0], prev.pos[:, bx, 1], gx, gy)
    dc = _dist(cur.pos[:, bx, 0], cur.pos[:, bx, 1], gx, gy)
    rs.success = rs.box_crossed.copy()
    return {"box_crossed": ev.astype(np.float64), "box_dist": dp - dc}


def _football_2v1(task, prev, cur, rs):
    g = task.geom
    ball = g["ball"]
    ex = g["goal_lines"][1]
    gx, gy = g["goal_east"]
    goal = (prev.pos[:, ball, 0] <= ex) & (cur.pos[:, ball, 0] > ex)
    d = _dist(cur.pos[:, ball, 0], cur.pos[:, ball, 1], gx, gy)
    rs.success = goal.copy()
    return {"goal": goal.astype(np.float64), "ball_goal_prox": _exp_neg(d)}


def _push_cylinder(task, prev, cur, rs):
    g = task.geom
    cyl = g["cyl"]
    hi = g["center_x"] + g["win_margin"]
    lo = g["center_x"] - g["win_margin"]
    w0 = cur.pos[:, cyl, 0] >= hi
    w1 = cur.pos[:, cyl, 0] <= lo
    _set_winner(rs, w0, w1)
    prog = cur.pos[:, cyl, 0] - prev.pos[:, cyl, 0]
    return {"win": w0.astype(np.float64) - w1.astype(np.float64),
            "cylinder_progress": prog}


def _revolving_door(task, prev, cur, rs):
    g = task.geom
    ex = g["exit_x"]
    c0 = cur.pos[:, 0, 0] > ex
    c1 = cur.pos[:, 1, 0] > ex
    w0 = c0 & ~c1
    w1 = c1 & ~c0
    _set_winner(rs, w0, w1, draw=c0 & c1)
    prog = ((cur.pos[:, 0, 0] - prev.pos[:, 0, 0])
            - (cur.pos[:, 1, 0] - prev.pos[:, 1, 0]))
    return {"win": w0.astype(np.float64) - w1.astype(np.float64),
            "progress_diff": prog}


def _sumo(task, prev, cur, rs):
    g = task.geom
    cx, cy = g["ring_center"]
    rr = g["ring_radius"]
    d0c = _dist(cur.pos[:, 0, 0], cur.pos[:, 0, 1], cx, cy)
    d1c = _dist(cur.pos[:, 1, 0], cur.pos[:, 1, 1], cx, cy)
    d0p = _dist(prev.pos[:, 0, 0], prev.pos[:, 0, 1], cx, cy)
    d1p = _dist(prev.pos[:, 1, 0], prev.pos[:, 1, 1], cx, cy)
    lose0 = cur.fallen[:, 0].astype(bool) | (d0c > rr)
    lose1 = cur.fallen[:, 1].astype(bool) | (d1c > rr)
    w0 = lose1 & ~lose0
    w1 = lose0 & ~lose1
    _set_winner(rs, w0, w1, draw=lose0 & lose1)
    adv = (d1c - d1p) - (d0c - d0p)
    return {"win": w0.astype(np.float64) - w1.astype(np.float64),
            "ring_advantage": adv}


def _traverse_bridge(task, prev, cur, rs):
    g = task.geom
    reach0 = cur.pos[:, 0, 0] >= g["goal0_x"]
    reach1 = cur.pos[:, 1, 0] <= g["goal1_x"]
    f0 = cur.fallen[:, 0].astype(bool)
    f1 = cur.fallen[:, 1].astype(bool)
    raw0 = reach0 | f1
    raw1 = reach1 | f0
    w0 = raw0 & ~raw1
    w1 = raw1 & ~raw0
    _set_winner(rs, w0, w1, draw=raw0 & raw1)
    prog = ((cur.pos[:, 0, 0] - prev.pos[:, 0, 0])
            + (cur.pos[:, 1, 0] - prev.pos[:, 1, 0]))
    return {"win": w0.astype(np.float64) - w1.astype(np.float64),
            "progress_diff": prog}


def _football_vs(task, prev, cur, rs):
    g = task.geom
    ball = g["ball"]
    wx, ex = g["goal_lines"]
    g0 = (prev.pos[:, ball, 0] <= ex) & (cur.pos[:, ball, 0] > ex)
    g1 = (prev.pos[:, ball, 0] >= wx) & (cur.pos[:, ball, 0] < wx)
    _set_winner(rs, g0 & ~g1, g1 & ~g0)
    gwx, gwy = g["goal_west"]
    gex, gey = g["goal_east"]
    mp = (_dist(prev.pos[:, ball, 0], prev.pos[:, ball, 1], gwx, gwy)
          - _dist(prev.pos[:, ball, 0], prev.pos[:, ball, 1], gex, gey))
    mc = (_dist(cur.pos[:, ball, 0], cur.pos[:, ball, 1], gwx, gwy)
          - _dist(cur.pos[:, ball, 0], cur.pos[:, ball, 1], gex, gey))
    return {"goal": g0.astype(np.float64) - g1.astype(np.float64),
            "ball_progress": mc - mp}


def _set_winner(rs, w0, w1, draw=None):
    rs.winner[:] = -1
    rs.winner[w1] = 1
    rs.winner[w0] = 0
    if draw is not None:
        rs.winner[draw] = 2


_TASK_REWARDS = {
    "narrow_gate": _narrow_gate,
    "climb_seesaw": _climb_seesaw,
    "sheepdog_easy": _sheepdog_easy,
    "sheepdog_hard": _sheepdog_hard,
    "push_box": _push_box,
    "football_2v1": _football_2v1,
    "push_cylinder": _push_cylinder,
    "revolving_door": _revolving_door,
    "sumo": _sumo,
    "traverse_bridge": _traverse_bridge,
    "football_1v1": _football_vs,
    "football_2v2": _football_vs,
}


# --------------------------------------------------------------------------
# termination
# --------------------------------------------------------------------------

def check_termination(task, cur, rs, step_counts):
    """Done flags and outcome codes after the step that produced cur/rs."""
    E = cur.pos.shape[0]
    done = np.zeros(E, dtype=bool)
    outcome = np.zeros(E, dtype=np.int8)
    agents = [a for team in task.teams for a in team]
    if task.collaborative:
        done |= rs.success
        outcome[rs.success] = OUTCOME_SUCCESS
        all_fallen = np.ones(E, dtype=bool)
        for a in agents:
            all_fallen &= cur.fallen[:, a].astype(bool)
        newly = all_fallen & ~done
        done |= newly
        outcome[newly] = OUTCOME_FAILED
    else:
        has_winner = rs.winner >= 0
        done |= has_winner
        outcome[rs.winner == 0] = OUTCOME_TEAM0
        outcome[rs.winner == 1] = OUTCOME_TEAM1
        outcome[rs.winner == 2] = OUTCOME_DRAW
    timeout = (step_counts >= task.episode_len) & ~done
    done |= timeout
    outcome[timeout] = OUTCOME_TIMEOUT
    return done, outcome
