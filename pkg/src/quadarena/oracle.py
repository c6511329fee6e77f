"""Independent single-pass reward oracle over trajectory dumps.

Recomputes every reward term, per-agent reward and termination label from
recorded body states alone, using plain scalar arithmetic, and reports the
maximum absolute discrepancy against what the environment recorded. This is
deliberately a from-scratch implementation of the reward semantics: it
shares task metadata (scales, geometry) with the environment but none of its
computation path.

Body rows are [x, y, yaw, vx, vy, omega, z, fallen].
"""

import math
import time

from .config import Config
from .record import SCHEMA, read_trajectory
from .rewards import (OUTCOME_DRAW, OUTCOME_FAILED, OUTCOME_LABELS,
                      OUTCOME_SUCCESS, OUTCOME_TEAM0, OUTCOME_TEAM1,
                      OUTCOME_TIMEOUT)
from .tasks import build_task

__all__ = ["replay_verify", "OracleMismatch"]


class OracleMismatch:
    def __init__(self, env, step, what, got, expected):
        self.env, self.step, self.what = env, step, what
        self.got, self.expected = got, expected

    def __repr__(self):
        return (f"Mismatch(env={self.env}, step={self.step}, {self.what}: "
                f"recorded={self.got!r}, oracle={self.expected!r})")


def _d(ax, ay, bx, by):
    dx = ax - bx
    dy = ay - by
    return math.sqrt(dx * dx + dy * dy)


class _EnvTrack:
    """Oracle-side episode state for one environment."""

    def __init__(self, task):
        self.task = task
        self.reset(None)

    def reset(self, bodies):
        t = self.task
        self.prev = bodies
        self.crossed = [False] * t.n_agents
        self.dest = [False] * t.n_agents
        self.contact = False
        self.sheep_crossed = [False] * max(1, len(t.sheep_map))
        self.box_crossed = False
        self.step = 0

    # ---- term computation (scalar, single transition) -------------------
    def terms_for(self, cur):
        t = self.task
        g = t.geom
        prev = self.prev
        fn = getattr(self, "_" + t.id)
        out = fn(prev, cur, g)
        return out

    def _cross(self, latch, idx, prev_x, cur_x, gate_x):
        if not latch[idx] and prev_x <= gate_x < cur_x:
            latch[idx] = True
            return 1.0
        return 0.0

    def _spacing(self, cur, spec):
        a, b = self.task.geom["collision_pair"]
        d = _d(cur[a][0], cur[a][1], cur[b][0], cur[b][1])
        c = min(d, spec.clip[1])
        return c * c

    def _collision(self, cur):
        a, b = self.task.geom["collision_pair"]
        r = self.task.cfg["robot.radius"]
        thresh = 2.0 * r + self.task.cfg["reward.collision_clearance"]
        touching = _d(cur[a][0], cur[a][1], cur[b][0], cur[b][1]) < thresh
        onset = touching and not self.contact
        self.contact = touching
        return 1.0 if onset else 0.0

    def _narrow_gate(self, prev, cur, g):
        gx = g["gate_x"]
        tx, ty = g["target"]
        ev = (self._cross(self.crossed, 0, prev[0][0], cur[0][0], gx)
              + self._cross(self.crossed, 1, prev[1][0], cur[1][0], gx))
        delta = ((_d(prev[0][0], prev[0][1], tx, ty)
                  - _d(cur[0][0], cur[0][1], tx, ty))
                 + (_d(prev[1][0], prev[1][1], tx, ty)
                    - _d(cur[1][0], cur[1][1], tx, ty)))
        spec = {s.name: s for s in self.task.reward_terms}
        return {"gate_crossed": ev, "dist_to_target": delta,
                "agent_spacing": self._spacing(cur, spec["agent_spacing"]),
                "collision": self._collision(cur)}

    def _climb_seesaw(self, prev, cur, g):
        x0, x1, py = g["plank_x0"], g["plank_x1"], g["plank_y"]
        dest_ev = 0.0
        for a in range(2):
            at = cur[a][0] > g["dest_x0"] and cur[a][6] > g["dest_z"]
            if at and not self.dest[a]:
                self.dest[a] = True
                dest_ev += 1.0
        height = cur[0][6] + cur[1][6]
        prog = ((_clip(cur[0][0], x0, x1) - _clip(prev[0][0], x0, x1))
                + (_clip(cur[1][0], x0, x1) - _clip(prev[1][0], x0, x1)))
        sd0 = _seg_d(cur[0][0], cur[0][1], x0, py, x1, py)
        sd1 = _seg_d(cur[1][0], cur[1][1], x0, py, x1, py)
        fall = (float(cur[0][7] and not prev[0][7])
                + float(cur[1][7] and not prev[1][7]))
        spec = {s.name: s for s in self.task.reward_terms}
        return {"destination": dest_ev, "agent_height": height,
                "seesaw_progress": prog,
                "seesaw_dist": sd0 * sd0 + sd1 * sd1,
                "collision": self._collision(cur), "fall": fall,
                "agent_spacing": self._spacing(cur, spec["agent_spacing"])}

    def _sheepdog_easy(self, prev, cur, g):
        s = self.task.sheep_map[0]
        gx, gy = g["gate_center"]
        ev = self._cross(self.sheep_crossed, 0, prev[s][0], cur[s][0], g["gate_x"])
        delta = (_d(prev[s][0], prev[s][1], gx, gy)
                 - _d(cur[s][0], cur[s][1], gx, gy))
        return {"sheep_crossed": ev, "sheep_dist": delta}

    def _sheepdog_hard(self, prev, cur, g):
        gx, gy = g["gate_center"]
        count = 0.0
        prox = 0.0
        for k, s in enumerate(self.task.sheep_map):
            count += self._cross(self.sheep_crossed, k, prev[s][0], cur[s][0],
                                 g["gate_x"])
            prox += math.exp(-_d(cur[s][0], cur[s][1], gx, gy))
        return {"sheep_crossed": count, "sheep_gate_prox": prox}

    def _push_box(self, prev, cur, g):
        b = g["box"]
        gx, gy = g["gate_center"]
        ev = 0.0
        if not self.box_crossed and prev[b][0] <= g["gate_x"] < cur[b][0]:
            self.box_crossed = True
            ev = 1.0
        delta = (_d(prev[b][0], prev[b][1], gx, gy)
                 - _d(cur[b][0], cur[b][1], gx, gy))
        return {"box_crossed": ev, "box_dist": delta}

    def _football_2v1(self, prev, cur, g):
        b = g["ball"]
        ex = g["goal_lines"][1]
        gx, gy = g["goal_east"]
        goal = 1.0 if (prev[b][0] <= ex < cur[b][0]) else 0.0
        return {"goal": goal,
                "ball_goal_prox": math.exp(-_d(cur[b][0], cur[b][1], gx, gy))}

    def _push_cylinder(self, prev, cur, g):
        c = g["cyl"]
        hi = g["center_x"] + g["win_margin"]
        lo = g["center_x"] - g["win_margin"]
        w0 = 1.0 if cur[c][0] >= hi else 0.0
        w1 = 1.0 if cur[c][0] <= lo else 0.0
        return {"win": w0 - w1, "cylinder_progress": cur[c][0] - prev[c][0]}

    def _revolving_door(self, prev, cur, g):
        ex = g["exit_x"]
        c0 = cur[0][0] > ex
        c1 = cur[1][0] > ex
        w0 = 1.0 if (c0 and not c1) else 0.0
        w1 = 1.0 if (c1 and not c0) else 0.0
        prog = ((cur[0][0] - prev[0][0]) - (cur[1][0] - prev[1][0]))
        return {"win": w0 - w1, "progress_diff": prog}

    def _sumo(self, prev, cur, g):
        cx, cy = g["ring_center"]
        rr = g["ring_radius"]
        lose0 = bool(cur[0][7]) or _d(cur[0][0], cur[0][1], cx, cy) > rr
        lose1 = bool(cur[1][7]) or _d(cur[1][0], cur[1][1], cx, cy) > rr
        w0 = 1.0 if (lose1 and not lose0) else 0.0
        w1 = 1.0 if (lose0 and not lose1) else 0.0
        adv = ((_d(cur[1][0], cur[1][1], cx, cy)
                - _d(prev[1][0], prev[1][1], cx, cy))
               - (_d(cur[0][0], cur[0][1], cx, cy)
                  - _d(prev[0][0], prev[0][1], cx, cy)))
        return {"win": w0 - w1, "ring_advantage": adv}

    def _traverse_bridge(self, prev, cur, g):
        raw0 = cur[0][0] >= g["goal0_x"] or bool(cur[1][7])
        raw1 = cur[1][0] <= g["goal1_x"] or bool(cur[0][7])
        w0 = 1.0 if (raw0 and not raw1) else 0.0
        w1 = 1.0 if (raw1 and not raw0) else 0.0
        prog = ((cur[0][0] - prev[0][0]) + (cur[1][0] - prev[1][0]))
        return {"win": w0 - w1, "progress_diff": prog}

    def _football(self, prev, cur, g):
        b = g["ball"]
        wx, ex = g["goal_lines"]
        g0 = prev[b][0] <= ex < cur[b][0]
        g1 = prev[b][0] >= wx > cur[b][0]
        gwx, gwy = g["goal_west"]
        gex, gey = g["goal_east"]
        mp = (_d(prev[b][0], prev[b][1], gwx, gwy)
              - _d(prev[b][0], prev[b][1], gex, gey))
        mc = (_d(cur[b][0], cur[b][1], gwx, gwy)
              - _d(cur[b][0], cur[b][1], gex, gey))
        return {"goal": (1.0 if g0 and not g1 else 0.0)
                - (1.0 if g1 and not g0 else 0.0),
                "ball_progress": mc - mp}

    _football_1v1 = _football
    _football_2v2 = _football

    # ---- outcome recomputation -------------------------------------------
    def outcome_for(self, cur, terms):
        t = self.task
        if t.collaborative:
            success = {
                "narrow_gate": lambda: all(self.crossed),
                "climb_seesaw": lambda: any(self.dest),
                "sheepdog_easy": lambda: all(self.sheep_crossed),
                "sheepdog_hard": lambda: all(self.sheep_crossed),
                "push_box": lambda: self.box_crossed,
                "football_2v1": lambda: terms["goal"] > 0.0,
            }[t.id]()
            if success:
                return OUTCOME_SUCCESS
            agents = range(t.n_agents)
            if all(bool(cur[a][7]) for a in agents):
                return OUTCOME_FAILED
        else:
            win = terms.get("win", terms.get("goal", 0.0))
            if t.id == "sumo":
                g = t.geom
                cx, cy = g["ring_center"]
                rr = g["ring_radius"]
                lose0 = bool(cur[0][7]) or _d(cur[0][0], cur[0][1], cx, cy) > rr
                lose1 = bool(cur[1][7]) or _d(cur[1][0], cur[1][1], cx, cy) > rr
                if lose0 and lose1:
                    return OUTCOME_DRAW
            if t.id == "traverse_bridge":
                g = t.geom
                raw0 = cur[0][0] >= g["goal0_x"] or bool(cur[1][7])
                raw1 = cur[1][0] <= g["goal1_x"] or bool(cur[0][7])
                if raw0 and raw1:
                    return OUTCOME_DRAW
            if t.id == "revolving_door":
                if cur[0][0] > t.geom["exit_x"] and cur[1][0] > t.geom["exit_x"]:
                    return OUTCOME_DRAW
            if win > 0.0:
                return OUTCOME_TEAM0
            if win < 0.0:
                return OUTCOME_TEAM1
        if self.step >= t.episode_len:
            return OUTCOME_TIMEOUT
        return None


def _clip(x, lo, hi):
    return lo if x < lo else (hi if x > hi else x)


def _seg_d(px, py, x0, y0, x1, y1):
    ux, uy = x1 - x0, y1 - y0
    ll = ux * ux + uy * uy
    t = ((px - x0) * ux + (py - y0) * uy) / ll
    t = _clip(t, 0.0, 1.0)
    return _d(px, py, x0 + t * ux, y0 + t * uy)


def replay_verify(path, mismatch_tol=0.0, max_mismatches=20):
    """Recompute all rewards and termination labels from a trajectory file.

    Returns a report dict with the maximum absolute reward discrepancy, any
    termination label mismatches, and malformed lines.
    """
    start = time.perf_counter()
    header = None
    tracks = {}
    task = None
    max_disc = 0.0
    mismatches = []
    malformed = []
    label_mismatches = []
    n_rows = 0

    for lineno, doc, err in read_trajectory(path):
        if err is not None:
            malformed.append((lineno, err))
            continue
        if header is None:
            header = doc
            if doc.get("schema") != SCHEMA:
                malformed.append((lineno, f"unexpected schema {doc.get('schema')!r}"))
                break
            cfg = Config(doc.get("overrides") or {})
            task = build_task(doc["task"], cfg)
            continue
        e = doc["env"]
        if doc.get("reset"):
            if e not in tracks:
                tracks[e] = _EnvTrack(task)
            tracks[e].reset(doc["bodies"])
            continue
        track = tracks.get(e)
        if track is None or track.prev is None:
            malformed.append((lineno, f"step row for env {e} before reset"))
            continue
        n_rows += 1
        track.step += 1
        cur = doc["bodies"]
        terms = track.terms_for(cur)
        if track.step != doc["step"]:
            label_mismatches.append(OracleMismatch(e, doc["step"], "step",
                                                   doc["step"], track.step))
        total = 0.0
        for spec in task.reward_terms:
            v = terms[spec.name] * spec.scale
            rec = doc["terms"].get(spec.name)
            if rec is None:
                mismatches.append(OracleMismatch(e, doc["step"],
                                                 f"missing term {spec.name}",
                                                 None, v))
            else:
                disc = abs(rec - v)
                if disc > max_disc:
                    max_disc = disc
                if disc > mismatch_tol and len(mismatches) < max_mismatches:
                    mismatches.append(OracleMismatch(
                        e, doc["step"], f"term {spec.name}", rec, v))
            total += v
        for a in range(task.n_agents):
            expect = total if (task.collaborative or a in task.teams[0]) else -total
            disc = abs(doc["rew"][a] - expect)
            if disc > max_disc:
                max_disc = disc
            if disc > mismatch_tol and len(mismatches) < max_mismatches:
                mismatches.append(OracleMismatch(
                    e, doc["step"], f"reward agent {a}", doc["rew"][a], expect))
        out = track.outcome_for(cur, terms)
        rec_done = doc.get("done", False)
        rec_label = doc.get("outcome")
        if (out is not None) != rec_done or OUTCOME_LABELS.get(out) != rec_label:
            label_mismatches.append(OracleMismatch(
                e, doc["step"], "outcome", (rec_done, rec_label),
                (out is not None, OUTCOME_LABELS.get(out))))
        track.prev = cur

    return {
        "path": str(path),
        "task": header["task"] if header else None,
        "rows": n_rows,
        "max_abs_discrepancy": max_disc,
        "mismatches": mismatches,
        "termination_mismatches": label_mismatches,
        "malformed_lines": malformed,
        "elapsed_s": time.perf_counter() - start,
    }
