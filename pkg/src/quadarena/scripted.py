"""Scripted waypoint policies: solvability proofs and regression fixtures.

Each policy reads privileged batch state and emits per-agent velocity
commands. They are deliberately simple FSMs over waypoints; speed is not the
point, determinism and reliable success are.
"""

import math

import numpy as np

from .config import ConfigError

__all__ = ["get_policy", "SCRIPTED_POLICIES"]


def _toward(px, py, yaw, tx, ty, speed, slow_gain=2.5, yaw_gain=3.0,
            max_yaw=2.0):
    """Body-frame command driving (px, py, yaw) toward (tx, ty)."""
    dx, dy = tx - px, ty - py
    dist = math.sqrt(dx * dx + dy * dy)
    if dist < 1e-9:
        return 0.0, 0.0, 0.0
    v = min(speed, slow_gain * dist)
    wvx, wvy = v * dx / dist, v * dy / dist
    cs, sn = math.cos(yaw), math.sin(yaw)
    bvx = cs * wvx + sn * wvy
    bvy = -sn * wvx + cs * wvy
    err = math.atan2(dy, dx) - yaw
    err = (err + math.pi) % (2.0 * math.pi) - math.pi
    wz = max(-max_yaw, min(max_yaw, yaw_gain * err))
    return bvx, bvy, wz


class _Base:
    def __init__(self, task):
        self.task = task
        self._seen = None

    def reset(self, batch):
        self._seen = np.zeros(batch.n_envs, dtype=bool)

    def reset_env(self, e):
        pass

    def __call__(self, batch):
        E, A = batch.n_envs, self.task.n_agents
        if self._seen is None:
            self.reset(batch)
        act = np.zeros((E, A, 3))
        sim = batch.sim
        for e in range(E):
            # an env at step 0 has just (re)spawned: clear per-env FSM state
            if batch.step_counts[e] == 0:
                self.reset_env(e)
            self.act_env(batch, sim, e, act[e])
        return act


class ZeroPolicy(_Base):
    def __call__(self, batch):
        return np.zeros((batch.n_envs, self.task.n_agents, 3))


class RandomPolicy(_Base):
    def __init__(self, task, seed=2024):
        super().__init__(task)
        self._rng = np.random.Generator(np.random.PCG64(seed))

    def __call__(self, batch):
        cfg = self.task.cfg
        lo = np.array([-cfg["locomotion.max_vx"], -cfg["locomotion.max_vy"],
                       -cfg["locomotion.max_yaw_rate"]])
        return self._rng.uniform(lo, -lo,
                                 size=(batch.n_envs, self.task.n_agents, 3))


class NarrowGateSolver(_Base):
    """Leader crosses first; follower holds clear, then follows."""

    def reset(self, batch):
        super().reset(batch)
        self.wp = np.zeros((batch.n_envs, 2), dtype=int)

    def reset_env(self, e):
        self.wp[e] = 0

    def act_env(self, batch, sim, e, act):
        g = self.task.geom
        gx = g["gate_x"]
        lead_pts = [(gx - 0.9, 0.0), (gx + 1.0, 0.0), (gx + 2.6, -1.2)]
        foll_pts = [(gx - 0.9, 0.0), (gx + 1.0, 0.0), (gx + 2.6, 1.2)]
        hold = (gx - 2.3, 1.4)
        for a, pts in ((0, lead_pts), (1, foll_pts)):
            x, y, yaw = sim.pos[e, a, 0], sim.pos[e, a, 1], sim.yaw[e, a]
            if a == 1 and sim.pos[e, 0, 0] <= gx + 0.7 and self.wp[e, 1] == 0:
                act[a] = _toward(x, y, yaw, hold[0], hold[1], 1.0)
                continue
            i = min(self.wp[e, a], len(pts) - 1)
            tx, ty = pts[i]
            if math.hypot(x - tx, y - ty) < 0.3 and i < len(pts) - 1:
                self.wp[e, a] = i + 1
                tx, ty = pts[i + 1]
            act[a] = _toward(x, y, yaw, tx, ty, 1.2)


class ClimbSeesawSolver(_Base):
    """Agent 1 climbs the stable near half and holds short of the pivot;
    agent 0 then anchors the ground end behind it, and the climber tops out.
    The plank is one robot wide, so the order matters."""

    solo = False

    def reset(self, batch):
        super().reset(batch)
        self.wp = np.zeros((batch.n_envs, 2), dtype=int)

    def reset_env(self, e):
        self.wp[e] = 0

    def act_env(self, batch, sim, e, act):
        g = self.task.geom
        entry_x, top_x, py = g["plank_x0"], g["plank_x1"], g["plank_y"]
        pivot_x = g["pivot"][0]
        dest = (g["dest_x0"] + 1.0, py)
        anchor_pt = (entry_x + 0.35, py)
        hold_pt = (pivot_x - 0.3, py)
        x0, y0, yaw0 = sim.pos[e, 0, 0], sim.pos[e, 0, 1], sim.yaw[e, 0]
        x1, y1, yaw1 = sim.pos[e, 1, 0], sim.pos[e, 1, 1], sim.yaw[e, 1]
        anchored = math.hypot(x0 - anchor_pt[0], y0 - anchor_pt[1]) < 0.25

        if not self.solo:
            if x1 > entry_x + 0.3:
                # climber is committed to the plank: move in and hold the end
                if anchored:
                    act[0] = (0.0, 0.0, 0.0)
                else:
                    act[0] = _toward(x0, y0, yaw0, anchor_pt[0], anchor_pt[1],
                                     1.2, slow_gain=6.0)
            else:
                act[0] = _toward(x0, y0, yaw0, entry_x - 1.1, py - 1.2, 1.2)

        climb_pts = [(entry_x - 0.5, py), hold_pt, (top_x - 0.1, py), dest]
        i = min(self.wp[e, 1], len(climb_pts) - 1)
        if i == 1 and not (anchored or self.solo):
            # wait short of the pivot until the plank is anchored
            act[1] = _toward(x1, y1, yaw1, hold_pt[0], hold_pt[1], 1.2,
                             slow_gain=6.0)
            return
        tx, ty = climb_pts[i]
        if math.hypot(x1 - tx, y1 - ty) < 0.25 and i < len(climb_pts) - 1:
            self.wp[e, 1] = i + 1
            tx, ty = climb_pts[i + 1]
        act[1] = _toward(x1, y1, yaw1, tx, ty, 1.2, slow_gain=6.0)


class ClimbSeesawSolo(ClimbSeesawSolver):
    """Climber goes alone; the unanchored plank collapses under it."""
    solo = True

    def act_env(self, batch, sim, e, act):
        super().act_env(batch, sim, e, act)
        act[0] = (0.0, 0.0, 0.0)


def _push_lane(sim, e, a, bx, by, gx, gy, slot, act, speed=1.5):
    """Drive agent a into its pushing lane behind the box, then push the box
    along the line toward the gate. slot is the signed lateral lane offset."""
    x, y, yaw = sim.pos[e, a, 0], sim.pos[e, a, 1], sim.yaw[e, a]
    dx, dy = gx - bx, gy - by
    d = math.sqrt(dx * dx + dy * dy)
    ux, uy = (dx / d, dy / d) if d > 1e-9 else (1.0, 0.0)
    qx, qy = -uy, ux
    along = (x - bx) * ux + (y - by) * uy
    lat = (x - bx) * qx + (y - by) * qy
    behind = along < -0.42
    in_lane = abs(lat - slot) < 0.25
    if behind and in_lane:
        tx, ty = bx + 1.5 * ux + slot * qx, by + 1.5 * uy + slot * qy
        act[a] = _toward(x, y, yaw, tx, ty, speed, slow_gain=8.0)
    elif behind:
        tx, ty = bx - 0.85 * ux + slot * qx, by - 0.85 * uy + slot * qy
        act[a] = _toward(x, y, yaw, tx, ty, 1.2)
    else:
        tx, ty = bx - 1.0 * ux + slot * qx, by - 1.0 * uy + slot * qy
        act[a] = _toward(x, y, yaw, tx, ty, 1.3)


class PushBoxSolver(_Base):
    """Each robot takes the pushing lane on its own side of the box; the box
    only yields once both lanes press (it defeats a single pusher)."""

    def reset(self, batch):
        super().reset(batch)
        self.side = np.zeros((batch.n_envs, 2))
        self.assigned = np.zeros(batch.n_envs, dtype=bool)

    def reset_env(self, e):
        self.assigned[e] = False

    def act_env(self, batch, sim, e, act):
        g = self.task.geom
        box = g["box"]
        bx, by = sim.pos[e, box, 0], sim.pos[e, box, 1]
        gx, gy = g["gate_center"]
        gx = gx + 1.5  # aim beyond the gate so the push line never degenerates
        if not self.assigned[e]:
            lower = 0 if sim.pos[e, 0, 1] <= sim.pos[e, 1, 1] else 1
            self.side[e, lower] = -0.26
            self.side[e, 1 - lower] = 0.26
            self.assigned[e] = True
        for a in range(2):
            _push_lane(sim, e, a, bx, by, gx, gy, self.side[e, a], act)


class PushBoxSingle(PushBoxSolver):
    """One robot pushes alone: the box must not yield."""

    def act_env(self, batch, sim, e, act):
        g = self.task.geom
        box = g["box"]
        bx, by = sim.pos[e, box, 0], sim.pos[e, box, 1]
        gx, gy = g["gate_center"]
        _push_lane(sim, e, 0, bx, by, gx + 1.5, gy, 0.0, act)
        act[1] = (0.0, 0.0, 0.0)


class SumoPusher(_Base):
    """Agent 0 charges the opponent; agent 1 does nothing."""

    def act_env(self, batch, sim, e, act):
        x, y, yaw = sim.pos[e, 0, 0], sim.pos[e, 0, 1], sim.yaw[e, 0]
        ox, oy = sim.pos[e, 1, 0], sim.pos[e, 1, 1]
        dx, dy = ox - x, oy - y
        d = math.sqrt(dx * dx + dy * dy)
        tx, ty = ox + 0.8 * dx / max(d, 1e-9), oy + 0.8 * dy / max(d, 1e-9)
        act[0] = _toward(x, y, yaw, tx, ty, 1.5, slow_gain=10.0)
        act[1] = (0.0, 0.0, 0.0)


class SheepdogEasySolver(_Base):
    """Dogs steer behind the sheep relative to the gate and press it through."""

    def act_env(self, batch, sim, e, act):
        g = self.task.geom
        gx, gy = g["gate_center"]
        s = self.task.sheep_map[0]
        sx, sy = sim.pos[e, s, 0], sim.pos[e, s, 1]
        dx, dy = sx - gx, sy - gy
        d = math.sqrt(dx * dx + dy * dy)
        ux, uy = (dx / d, dy / d) if d > 1e-9 else (1.0, 0.0)
        # perpendicular for lateral dog offsets
        qx, qy = -uy, ux
        for a, side in ((0, 0.45), (1, -0.45)):
            tx = sx + 1.0 * ux + side * qx
            ty = sy + 1.0 * uy + side * qy
            x, y, yaw = sim.pos[e, a, 0], sim.pos[e, a, 1], sim.yaw[e, a]
            act[a] = _toward(x, y, yaw, tx, ty, 1.5, slow_gain=4.0)


SCRIPTED_POLICIES = {
    "narrow_gate_solver": (NarrowGateSolver, "narrow_gate"),
    "climb_seesaw_solver": (ClimbSeesawSolver, "climb_seesaw"),
    "climb_seesaw_solo": (ClimbSeesawSolo, "climb_seesaw"),
    "push_box_solver": (PushBoxSolver, "push_box"),
    "push_box_single": (PushBoxSingle, "push_box"),
    "sumo_pusher": (SumoPusher, "sumo"),
    "sheepdog_easy_solver": (SheepdogEasySolver, "sheepdog_easy"),
}


def get_policy(name, task):
    """Policy factory: 'zero', 'random', or 'scripted:<name>'."""
    if name == "zero":
        return ZeroPolicy(task)
    if name == "random":
        return RandomPolicy(task)
    if name.startswith("scripted:"):
        key = name.split(":", 1)[1]
        if key not in SCRIPTED_POLICIES:
            raise ConfigError(
                f"unknown scripted policy {key!r}; "
                f"have: {', '.join(sorted(SCRIPTED_POLICIES))}")
        cls, task_id = SCRIPTED_POLICIES[key]
        if task.id != task_id:
            raise ConfigError(f"policy {key!r} is for task {task_id!r}, "
                              f"not {task.id!r}")
        return cls(task)
    raise ConfigError(f"unknown policy {name!r} "
                      "(use zero | random | scripted:<name>)")
