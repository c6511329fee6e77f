"""Batched Dec-POMDP environment: N independent seeded instances.

One EnvBatch owns N copies of a task stepped in lockstep. Per-env RNG
streams derive solely from (master_seed, env_index); NPC decisions, rewards,
terminations and resets run on the main thread, and the physics kernel runs
over disjoint env ranges on an optional worker pool, so results are
bit-identical for any worker count. Finished environments auto-reset inside
the same step; the terminal observation is preserved in infos.

Output buffers are reused between steps (callers copy what they keep).
"""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import obs as obs_mod
from . import rewards as rw
from .config import Config, ConfigError
from .core import Sim
from .locomotion import clip_actions
from .npc import batch_defender_cmd, batch_sheep_accel
from .tasks import TaskSpec, build_task, spaces as task_spaces
from .terrain import spawn_layout

__all__ = ["EnvBatch", "StepResult", "EnvFault", "make", "bench"]


class EnvFault(ValueError):
    """Bad action array: wrong shape or non-finite values."""


@dataclass
class StepResult:
    obs: np.ndarray        # (E, A, obs_dim), reused buffer
    rewards: np.ndarray    # (E, A)
    dones: np.ndarray      # (E,) bool
    infos: list            # per-env dict for finished envs, else None


class _Snapshot:
    def __init__(self, E, B):
        self.pos = np.zeros((E, B, 2))
        self.z = np.zeros((E, B))
        self.fallen = np.zeros((E, B), dtype=np.uint8)

    def take(self, sim):
        np.copyto(self.pos, sim.pos)
        np.copyto(self.z, sim.z)
        np.copyto(self.fallen, sim.fallen)


def make(task_id, n_envs, master_seed=0, cfg=None, workers=None):
    return EnvBatch(task_id, n_envs, master_seed, cfg=cfg, workers=workers)


class EnvBatch:
    def __init__(self, task, n_envs, master_seed=0, cfg=None, workers=None):
        if n_envs <= 0:
            raise ConfigError("n_envs must be >= 1")
        cfg = cfg or Config()
        self.task = task if isinstance(task, TaskSpec) else build_task(task, cfg)
        self.cfg = self.task.cfg
        self.n_envs = n_envs
        self.master_seed = int(master_seed)
        if workers is None:
            workers = int(os.environ.get("QUADARENA_WORKERS", "1"))
        self.workers = max(1, min(workers, n_envs))
        self._pool = (ThreadPoolExecutor(max_workers=self.workers)
                      if self.workers > 1 else None)

        t = self.task
        # agents must occupy body slots 0..n_agents-1 (rewards index by agent)
        assert list(t.ctrl_map[:t.n_agents]) == list(range(t.n_agents))
        self.sim = Sim(n_envs, t.bodies, t.arena, self.cfg,
                       ctrl_map=t.ctrl_map, sheep_map=t.sheep_map,
                       door_body=t.door_body, n_workers=self.workers)
        E, A = n_envs, t.n_agents
        self.obs_dim = t.obs_dim
        self.priv_dim = t.obs_dim + t.privileged_extra_dim
        self._obs = np.zeros((E, A, self.obs_dim))
        self._priv = None
        self._rewards = np.zeros((E, A))
        self._dones = np.zeros(E, dtype=bool)
        self._cmd = np.zeros((E, len(t.ctrl_map), 3))
        ns = len(t.sheep_map)
        self._npc_acc = np.zeros((E, max(1, ns), 2)) if ns else None
        self._noise = np.zeros((E, ns, 2)) if ns else None
        self.step_counts = np.zeros(E, dtype=np.int64)
        self.episode_returns = np.zeros((E, A))
        self.latches = rw.RewardState(t, E)
        self._prev = _Snapshot(E, len(t.bodies))
        self._rngs = None
        self.recorder = None
        self.phase_times = {k: 0.0 for k in
                            ("npc", "kernel", "rewards", "obs", "reset")}
        self._slices = self._make_slices()
        self.total_steps = 0

    # ------------------------------------------------------------------
    def _make_slices(self):
        bounds = np.linspace(0, self.n_envs, self.workers + 1).astype(int)
        return [(int(bounds[i]), int(bounds[i + 1]), i)
                for i in range(self.workers) if bounds[i] < bounds[i + 1]]

    def _spawn_rng(self, i):
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(i,))
        return np.random.Generator(np.random.PCG64(seq))

    def reset(self):
        """Reset every env from the master seed; returns the obs buffer."""
        self._rngs = [self._spawn_rng(i) for i in range(self.n_envs)]
        for e in range(self.n_envs):
            self._reset_env(e)
        obs_mod.build_obs(self.task, self.sim, self._obs)
        if self.recorder is not None:
            for e in range(self.n_envs):
                self.recorder.write_reset(self, e)
        return self._obs

    def _reset_env(self, e):
        t0 = time.perf_counter()
        sim, task = self.sim, self.task
        sim.reset_env(e)
        poses = spawn_layout(task.arena, task, self._rngs[e])
        for b, (x, y, yaw) in poses.items():
            sim.pos[e, b] = (x, y)
            sim.yaw[e, b] = yaw
        sim.snap_supports(e)
        self.latches.reset_env(e)
        self.step_counts[e] = 0
        self.episode_returns[e] = 0.0
        self.phase_times["reset"] += time.perf_counter() - t0

    # ------------------------------------------------------------------
    def step(self, actions):
        """Advance every env one control step. actions: (E, A, 3)."""
        if self._rngs is None:
            raise RuntimeError("call reset() before step()")
        t = self.task
        actions = np.asarray(actions, dtype=np.float64)
        want = (self.n_envs, t.n_agents, 3)
        if actions.shape != want:
            raise EnvFault(f"actions shape {actions.shape} != {want}")
        if not np.isfinite(actions).all():
            bad = np.argwhere(~np.isfinite(actions))[0]
            raise EnvFault(f"non-finite action at env {bad[0]} agent {bad[1]}")

        sim = self.sim
        clip_actions(actions, self.cfg, out=self._cmd[:, :t.n_agents, :])

        # NPC decisions (main thread, worker-count independent)
        t0 = time.perf_counter()
        if t.defender is not None:
            defender_body = t.ctrl_map[-1]
            batch_defender_cmd(sim.pos, sim.yaw, t.geom["ball"], defender_body,
                               t.defender, self._cmd, len(t.ctrl_map) - 1)
        if self._npc_acc is not None:
            sp = t.sheep_params
            if sp.noise_sigma > 0.0:
                ns = len(t.sheep_map)
                for e in range(self.n_envs):
                    self._noise[e] = self._rngs[e].standard_normal((ns, 2))
                noise = self._noise
            else:
                noise = None
            dogs = list(t.teams[0])
            batch_sheep_accel(sim.pos, dogs, list(t.sheep_map), sp,
                              noise=noise, out=self._npc_acc)
        t1 = time.perf_counter()
        self.phase_times["npc"] += t1 - t0

        self._prev.take(sim)
        if self._pool is None:
            sim.step_range(0, self.n_envs, 0, cmd=self._cmd,
                           npc_acc=self._npc_acc)
        else:
            futs = [self._pool.submit(sim.step_range, lo, hi, w,
                                      self._cmd, self._npc_acc)
                    for lo, hi, w in self._slices]
            for f in futs:
                f.result()
        t2 = time.perf_counter()
        self.phase_times["kernel"] += t2 - t1

        self.step_counts += 1
        self.total_steps += 1
        rewards, term_values = rw.compute_rewards(t, self._prev, sim,
                                                  self.latches)
        self._last_terms = term_values
        np.copyto(self._rewards, rewards)
        self.episode_returns += rewards
        done, outcome = rw.check_termination(t, sim, self.latches,
                                             self.step_counts)
        t3 = time.perf_counter()
        self.phase_times["rewards"] += t3 - t2

        obs_mod.build_obs(t, self.sim, self._obs)
        t4 = time.perf_counter()
        self.phase_times["obs"] += t4 - t3

        infos = [None] * self.n_envs
        done_idx = np.nonzero(done)[0]
        for e in done_idx:
            infos[e] = {
                "outcome": rw.OUTCOME_LABELS[int(outcome[e])],
                "episode_return": self.episode_returns[e].copy(),
                "episode_len": int(self.step_counts[e]),
                "terminal_obs": self._obs[e].copy(),
            }
        if self.recorder is not None:
            self.recorder.write_step(self, rewards, term_values, done, outcome)
        if len(done_idx):
            for e in done_idx:
                self._reset_env(int(e))
            obs_mod.build_obs(t, self.sim, self._obs, idx=done_idx)
            if self.recorder is not None:
                for e in done_idx:
                    self.recorder.write_reset(self, int(e))
        np.copyto(self._dones, done)
        return StepResult(self._obs, self._rewards, self._dones, infos)

    # ------------------------------------------------------------------
    def privileged_obs(self):
        if self._priv is None:
            self._priv = np.zeros((self.n_envs, self.task.n_agents,
                                   self.priv_dim))
        return obs_mod.build_privileged(self.task, self.sim, self._obs,
                                        self._priv)

    def spaces(self):
        meta = task_spaces(self.task)
        meta["n_envs"] = self.n_envs
        meta["workers"] = self.workers
        return meta

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None


# --------------------------------------------------------------------------
# throughput benchmark
# --------------------------------------------------------------------------

def bench(batch, n_steps, policy="random", trials=5, warmup=50, seed=1234):
    """Steady-state throughput of a batch under a fixed policy.

    Returns agent-steps/s mean and std over trials plus a per-phase
    breakdown. Simulation stays deterministic; only the timing varies.
    """
    if n_steps < 1:
        raise ConfigError("bench needs n_steps >= 1")
    t = batch.task
    E, A = batch.n_envs, t.n_agents
    rng = np.random.Generator(np.random.PCG64(seed))
    lo = np.array([-t.cfg["locomotion.max_vx"], -t.cfg["locomotion.max_vy"],
                   -t.cfg["locomotion.max_yaw_rate"]])
    hi = -lo
    act = np.zeros((E, A, 3))

    def draw_actions():
        if policy == "random":
            act[:] = rng.uniform(lo, hi, size=(E, A, 3))
        elif policy == "zero":
            act[:] = 0.0
        else:
            act[:] = policy(batch)
        return act

    batch.reset()
    for _ in range(warmup):
        batch.step(draw_actions())

    rates = []
    for _ in range(trials):
        for k in batch.phase_times:
            batch.phase_times[k] = 0.0
        start = time.perf_counter()
        for _ in range(n_steps):
            batch.step(draw_actions())
        elapsed = time.perf_counter() - start
        rates.append(E * A * n_steps / elapsed)
    rates = np.asarray(rates)
    total_phase = sum(batch.phase_times.values())
    breakdown = {k: v / total_phase for k, v in batch.phase_times.items()
                 if total_phase > 0}
    return {
        "task": t.id,
        "n_envs": E,
        "n_agents": A,
        "policy": policy if isinstance(policy, str) else "scripted",
        "n_steps": n_steps,
        "trials": trials,
        "agent_steps_per_sec_mean": float(rates.mean()),
        "agent_steps_per_sec_std": float(rates.std()),
        "env_steps_per_sec_mean": float(rates.mean() / A),
        "phase_fraction": breakdown,
    }
