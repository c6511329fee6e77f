"""Line-delimited trajectory recording.

One JSON document per line: a schema header, then per control step one row
per environment (post-step body states, actions, per-agent rewards, per-term
breakdown, done/outcome), with a fresh "reset" row whenever an environment
(re)starts. Floats serialize via repr, so a file replays to bit-identical
values: the reward oracle recomputes every term from these rows alone.
"""

import json

import numpy as np

SCHEMA = "quadarena-traj-1"

__all__ = ["TrajectoryRecorder", "read_trajectory", "SCHEMA"]


class TrajectoryRecorder:
    def __init__(self, path, batch):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8")
        header = {
            "schema": SCHEMA,
            "task": batch.task.id,
            "n_envs": batch.n_envs,
            "n_agents": batch.task.n_agents,
            "master_seed": batch.master_seed,
            "overrides": batch.cfg.overrides(),
        }
        self._write(header)

    def _write(self, doc):
        self._fh.write(json.dumps(doc, separators=(",", ":")) + "\n")

    def _bodies(self, batch, e):
        sim = batch.sim
        out = []
        for b in range(len(batch.task.bodies)):
            out.append([float(sim.pos[e, b, 0]), float(sim.pos[e, b, 1]),
                        float(sim.yaw[e, b]), float(sim.vel[e, b, 0]),
                        float(sim.vel[e, b, 1]), float(sim.omg[e, b]),
                        float(sim.z[e, b]), int(sim.fallen[e, b])])
        return out

    def _hinge(self, batch, e):
        if batch.task.arena.seesaw is None:
            return None
        return [float(batch.sim.hinge_ang[e]), float(batch.sim.hinge_omg[e])]

    def write_reset(self, batch, e):
        row = {"env": e, "reset": True, "bodies": self._bodies(batch, e)}
        h = self._hinge(batch, e)
        if h is not None:
            row["hinge"] = h
        self._write(row)

    def write_step(self, batch, rewards, term_values, done, outcome):
        from .rewards import OUTCOME_LABELS
        A = batch.task.n_agents
        for e in range(batch.n_envs):
            row = {
                "env": e,
                "step": int(batch.step_counts[e]),
                "bodies": self._bodies(batch, e),
                "actions": [[float(batch._cmd[e, a, 0]), float(batch._cmd[e, a, 1]),
                             float(batch._cmd[e, a, 2])] for a in range(A)],
                "rew": [float(rewards[e, a]) for a in range(A)],
                "terms": {k: float(v[e]) for k, v in term_values.items()},
                "done": bool(done[e]),
                "outcome": OUTCOME_LABELS[int(outcome[e])],
            }
            h = self._hinge(batch, e)
            if h is not None:
                row["hinge"] = h
            self._write(row)

    def close(self):
        self._fh.close()


def read_trajectory(path):
    """Yields (lineno, doc-or-None, error-or-None) for each line."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line), None
            except json.JSONDecodeError as exc:
                yield lineno, None, str(exc)
