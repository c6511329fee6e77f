"""Acceptance gate: one test per criterion, each at its stated tolerance.

Run with `pytest -v tests/test_acceptance.py` (or `-s` for the PASS lines).
The throughput numbers are engineering targets on desk hardware, not
reproductions of any published GPU figures.
"""

import hashlib
import math
import time

import numpy as np
import pytest

import quadarena as qa
from quadarena import rewards as rw
from quadarena import terrain as T
from quadarena.config import Config
from quadarena.core import BACKEND, Body, Sim
from quadarena.npc import batch_sheep_accel, sheep_policy
from quadarena.oracle import replay_verify
from quadarena.record import TrajectoryRecorder
from quadarena.scripted import get_policy
from quadarena.vecenv import EnvBatch, bench

CFG = Config()

PUBLISHED_SCALES = {
    "narrow_gate": {"gate_crossed": 5.0, "dist_to_target": 1.0,
                    "agent_spacing": 0.025, "collision": -2.0},
    "climb_seesaw": {"destination": 10.0, "agent_height": 1.0,
                     "seesaw_progress": 5.0, "seesaw_dist": -0.5,
                     "collision": -2.0, "fall": -2.0, "agent_spacing": 0.25},
    "sheepdog_easy": {"sheep_crossed": 1.0, "sheep_dist": 2.0},
    "sheepdog_hard": {"sheep_crossed": 1.0, "sheep_gate_prox": 1.0},
    "push_box": {"box_crossed": 1.0, "box_dist": 10.0},
    "football_2v1": {"goal": 10.0, "ball_goal_prox": 3.0},
}


def _report(name, ok, detail=""):
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# 1. Reward oracle equivalence
# ---------------------------------------------------------------------------

def test_reward_oracle_equivalence(tmp_path):
    start = time.perf_counter()
    worst = 0.0
    for tid in qa.TASK_IDS:
        path = tmp_path / f"{tid}.jsonl"
        batch = EnvBatch(tid, 10, master_seed=77)
        pol = get_policy("random", batch.task)
        rec = TrajectoryRecorder(str(path), batch)
        batch.recorder = rec
        batch.reset()
        for _ in range(100):                 # 1,000 recorded transitions
            batch.step(pol(batch))
        rec.close()
        batch.close()
        rep = replay_verify(path)
        assert rep["rows"] == 1000, tid
        assert not rep["termination_mismatches"], (tid, rep["termination_mismatches"][:2])
        worst = max(worst, rep["max_abs_discrepancy"])
    for tid, table in PUBLISHED_SCALES.items():
        got = {s.name: s.scale for s in qa.build_task(tid, CFG).reward_terms}
        assert got == table, tid
    elapsed = time.perf_counter() - start
    _report("reward-oracle-equivalence", worst <= 1e-9 and elapsed < 120,
            f"(max discrepancy {worst:.2e}, scales verified, {elapsed:.0f}s)")


# ---------------------------------------------------------------------------
# 2. Physics property suite
# ---------------------------------------------------------------------------

def test_physics_property_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    arena = T.compose_track([T.Flat((40.0, 40.0))], perimeter=False)

    # momentum: 10,000 randomized two-body collisions
    worst_p = 0.0
    for rep in range(5):
        m1, m2 = rng.uniform(0.5, 30.0, size=2)
        bodies = [Body("a", ("disc", 0.3), m1, 0.0, 3),
                  Body("b", ("disc", 0.35), m2, 0.0, 3)]
        sim = Sim(2000, bodies, arena, CFG)
        for e in range(2000):
            sim.reset_env(e)
        sim.pos[:, 0, 0] = 20.0 + rng.uniform(-0.2, 0.2, size=2000)
        sim.pos[:, 0, 1] = rng.uniform(-0.2, 0.2, size=2000)
        sim.pos[:, 1] = sim.pos[:, 0] + rng.uniform(-0.6, 0.6, size=(2000, 2))
        sim.vel[:, 0] = rng.uniform(-2, 2, size=(2000, 2))
        sim.vel[:, 1] = rng.uniform(-2, 2, size=(2000, 2))
        p0 = m1 * sim.vel[:, 0] + m2 * sim.vel[:, 1]
        sim.step_range(0, 2000, 0, stability=False)
        p1 = m1 * sim.vel[:, 0] + m2 * sim.vel[:, 1]
        worst_p = max(worst_p, float(np.abs(p1 - p0).max()))

    # non-penetration over >= 10,000 randomized stress env-steps
    from quadarena import physics as P
    walled = T.compose_track([T.WalledArena((10.0, 10.0))])
    bodies = [Body(f"d{i}", ("disc", 0.25 + 0.03 * i), 2.0 + i, 0.4, 3)
              for i in range(5)]
    bodies.append(Body("box", ("rect", 0.35, 0.25), 6.0, 0.45, 3))
    sim = Sim(64, bodies, walled, CFG)
    for e in range(64):
        sim.reset_env(e)
    sim.pos[:] = rng.uniform(1.5, 8.5, size=(64, 6, 2))
    sim.pos[:, :, 1] -= 5.0
    sim.vel[:] = rng.uniform(-2, 2, size=(64, 6, 2))
    worst_depth = 0.0
    wait = 3     # allow spawn interpenetration to be projected out first
    for step in range(160):
        sim.step_range(0, 64, 0, stability=False)
        sim.vel += rng.uniform(-0.2, 0.2, size=sim.vel.shape)
        if step < wait:
            continue
        for e in range(0, 64, 8):
            wbodies = []
            for i, body in enumerate(sim.bodies):
                shape = (P.Disc(sim.radius[i]) if sim.shape_code[i] == 0
                         else P.Rect(sim.half_w[i], sim.half_h[i]))
                wbodies.append(P.RigidBody(
                    id=i, shape=shape,
                    pose=(sim.pos[e, i, 0], sim.pos[e, i, 1], sim.yaw[e, i]),
                    mass=sim.mass[i]))
            for c in P.detect_contacts(P.WorldState(bodies=tuple(wbodies))):
                worst_depth = max(worst_depth, c.depth)

    # Coulomb stop time against the closed form
    mu, v0, g = 0.5, 2.0, CFG["physics.gravity"]
    bodies = [Body("s", ("disc", 0.3), 10.0, mu, 3)]
    sim = Sim(1, bodies, arena, CFG)
    sim.reset_env(0)
    sim.pos[0, 0] = (20.0, 0.0)
    sim.vel[0, 0] = (v0, 0.0)
    t = 0.0
    while math.hypot(*sim.vel[0, 0]) > 0 and t < 1.0:
        sim.step_range(0, 1, 0, stability=False)
        t += CFG["physics.dt"]
    stop_err = abs(t - v0 / (mu * g))

    # kinetic energy non-increasing under zero input
    bodies = [Body(f"d{i}", ("disc", 0.28), 3.0 + i, 0.3, 3) for i in range(4)]
    sim = Sim(32, bodies, walled, CFG)
    for e in range(32):
        sim.reset_env(e)
    sim.pos[:] = rng.uniform(2, 8, size=(32, 4, 2))
    sim.pos[:, :, 1] -= 5.0
    sim.vel[:] = rng.uniform(-2, 2, size=(32, 4, 2))
    ke_ok = True
    m = sim.mass[None, :]
    prev = (0.5 * m * (sim.vel[..., 0] ** 2 + sim.vel[..., 1] ** 2)).sum(axis=1)
    for _ in range(120):
        sim.step_range(0, 32, 0, stability=False)
        cur = (0.5 * m * (sim.vel[..., 0] ** 2 + sim.vel[..., 1] ** 2)).sum(axis=1)
        ke_ok &= bool((cur <= prev + 1e-9).all())
        prev = cur

    elapsed = time.perf_counter() - start
    ok = (worst_p <= 1e-6 and worst_depth <= 1e-3 and stop_err <= 2 * 0.02
          and ke_ok and elapsed < 300)
    _report("physics-properties", ok,
            f"(momentum {worst_p:.1e}, depth {worst_depth:.1e}, "
            f"stop-time err {stop_err:.3f}s, KE monotone {ke_ok}, {elapsed:.0f}s)")


# ---------------------------------------------------------------------------
# 3. Determinism across worker counts
# ---------------------------------------------------------------------------

def _stream_digest(tid, workers, steps, envs, seed=31):
    batch = EnvBatch(tid, envs, master_seed=seed, workers=workers)
    rng = np.random.Generator(np.random.PCG64(17))
    batch.reset()
    h = hashlib.sha256()
    na = batch.task.n_agents
    for _ in range(steps):
        act = rng.uniform(-1.5, 1.5, size=(envs, na, 3))
        res = batch.step(act)
        h.update(res.obs.tobytes())
        h.update(res.rewards.tobytes())
        h.update(res.dones.tobytes())
    batch.close()
    return h.hexdigest()


def test_determinism_across_workers():
    start = time.perf_counter()
    steps, envs = 10_000, 64
    for tid in qa.TASK_IDS:
        d1 = _stream_digest(tid, 1, steps, envs)
        d8 = _stream_digest(tid, 8, steps, envs)
        assert d1 == d8, f"{tid}: worker count changed the stream"
    elapsed = time.perf_counter() - start
    _report("determinism-1v8-workers", elapsed < 600,
            f"(12 tasks x {steps} steps x {envs} envs bit-identical, {elapsed:.0f}s)")


# ---------------------------------------------------------------------------
# 4. Scripted solvability
# ---------------------------------------------------------------------------

def _run_scripted(tid, policy_name, envs, seed, steps):
    batch = EnvBatch(tid, envs, master_seed=seed)
    pol = get_policy(policy_name, batch.task)
    batch.reset()
    pol.reset(batch)
    outcomes = []
    term_totals = {}
    per_episode_events = np.zeros(envs)
    done_events = []
    for _ in range(steps):
        res = batch.step(pol(batch))
        for name, v in batch._last_terms.items():
            term_totals[name] = term_totals.get(name, 0.0) + float(np.sum(v))
        for e, info in enumerate(res.infos):
            if info is not None:
                outcomes.append(info["outcome"])
    return batch, outcomes, term_totals


def test_scripted_solvability():
    start = time.perf_counter()

    # Narrow Gate: success rate 1.0 and both crossing bonuses fire once each
    batch = EnvBatch("narrow_gate", 8, master_seed=1)
    pol = get_policy("scripted:narrow_gate_solver", batch.task)
    batch.reset()
    pol.reset(batch)
    crossings = np.zeros(8)
    outcomes = []
    while len(outcomes) < 8:
        res = batch.step(pol(batch))
        crossings += batch._last_terms["gate_crossed"] / 5.0
        for info in res.infos:
            if info is not None:
                outcomes.append(info["outcome"])
    ng_ok = (all(o == "success" for o in outcomes)
             and np.allclose(crossings, 2.0))
    batch.close()

    # Climb on Seesaw: pair succeeds with the +10 destination bonus
    batch = EnvBatch("climb_seesaw", 4, master_seed=5)
    pol = get_policy("scripted:climb_seesaw_solver", batch.task)
    batch.reset()
    pol.reset(batch)
    dest_total = 0.0
    outcomes = []
    while len(outcomes) < 4:
        res = batch.step(pol(batch))
        dest_total += float(np.sum(batch._last_terms["destination"]))
        for info in res.infos:
            if info is not None:
                outcomes.append(info["outcome"])
    pair_ok = all(o == "success" for o in outcomes) and dest_total >= 10.0 * 4
    batch.close()

    # single robot collapses the seesaw and never succeeds
    batch = EnvBatch("climb_seesaw", 4, master_seed=5)
    pol = get_policy("scripted:climb_seesaw_solo", batch.task)
    batch.reset()
    pol.reset(batch)
    lo = batch.task.arena.seesaw.angle_limits[0]
    collapsed = np.zeros(4, dtype=bool)
    solo_outcomes = []
    for _ in range(batch.task.episode_len):
        res = batch.step(pol(batch))
        collapsed |= batch.sim.hinge_ang <= lo + 1e-6
        for info in res.infos:
            if info is not None:
                solo_outcomes.append(info["outcome"])
    solo_ok = (collapsed.all()
               and all(o != "success" for o in solo_outcomes))
    batch.close()

    # Push Box: a single robot cannot move it; the pair pushes it through
    batch = EnvBatch("push_box", 4, master_seed=5)
    pol = get_policy("scripted:push_box_single", batch.task)
    batch.reset()
    pol.reset(batch)
    engaged = [None] * 4
    displacement = [None] * 4
    for i in range(500):
        batch.step(pol(batch))
        s = batch.sim
        for e in range(4):
            if engaged[e] is None:
                gap = math.hypot(s.pos[e, 0, 0] - s.pos[e, 2, 0],
                                 s.pos[e, 0, 1] - s.pos[e, 2, 1])
                if gap < 0.78:
                    engaged[e] = (i, s.pos[e, 2, :].copy())
            elif displacement[e] is None and i - engaged[e][0] == 250:  # 5 s
                displacement[e] = float(
                    np.linalg.norm(s.pos[e, 2, :] - engaged[e][1]))
    single_ok = all(d is not None and d < 0.05 for d in displacement)
    batch.close()

    batch, outcomes, _ = _run_scripted("push_box", "scripted:push_box_solver",
                                       4, 5, 500)
    pair_push_ok = outcomes and all(o == "success" for o in outcomes)
    batch.close()

    # Sumo: scripted pusher drives a zero-policy opponent out of the ring
    batch = EnvBatch("sumo", 4, master_seed=5)
    pol = get_policy("scripted:sumo_pusher", batch.task)
    batch.reset()
    pol.reset(batch)
    sumo_outcomes = []
    while len(sumo_outcomes) < 4:
        res = batch.step(pol(batch))
        for info in res.infos:
            if info is not None:
                sumo_outcomes.append(info["outcome"])
    sumo_ok = all(o == "team_0" for o in sumo_outcomes)
    batch.close()

    elapsed = time.perf_counter() - start
    ok = (ng_ok and pair_ok and solo_ok and single_ok and pair_push_ok
          and sumo_ok and elapsed < 300)
    _report("scripted-solvability", ok,
            f"(gate {ng_ok}, seesaw pair {pair_ok}, seesaw solo-collapse "
            f"{solo_ok}, box single {single_ok} pair {pair_push_ok}, "
            f"sumo {sumo_ok}, {elapsed:.0f}s)")


# ---------------------------------------------------------------------------
# 5. NPC behavior
# ---------------------------------------------------------------------------

def test_npc_behavior():
    # (a) over 100 seeded episodes the mean sheep-dog distance never shrinks
    # while a scripted dog stalks it at low speed, until the sheep nears a wall
    E = 100
    batch = EnvBatch("sheepdog_easy", E, master_seed=123)
    batch.reset()
    s = batch.task.sheep_map[0]
    sim = batch.sim
    for e in range(E):
        sim.pos[e, 0] = (2.0, 0.0)      # stalking dog behind the sheep
        sim.pos[e, 1] = (0.7, -2.6)     # second dog parked far away
        sim.pos[e, s] = (3.2, 0.0)
        sim.yaw[e, 0] = 0.0
        sim.vel[e] = 0.0
    bounds = batch.task.arena.bounds
    means = []
    active = np.ones(E, dtype=bool)
    for _ in range(160):
        act = np.zeros((E, 2, 3))
        dx = sim.pos[:, s, 0] - sim.pos[:, 0, 0]
        dy = sim.pos[:, s, 1] - sim.pos[:, 0, 1]
        d = np.hypot(dx, dy)
        act[:, 0, 0] = 0.3                      # approach slowly, body frame
        act[:, 0, 2] = np.clip(3.0 * (np.arctan2(dy, dx) - sim.yaw[:, 0]),
                               -2, 2)
        near_wall = ((sim.pos[:, s, 0] > bounds[2] - 0.8)
                     | (np.abs(sim.pos[:, s, 1]) > bounds[3] - 0.8)
                     | (np.abs(sim.pos[:, s, 0]
                               - batch.task.geom["gate_x"]) < 0.8))
        active &= ~near_wall
        if active.sum() < E * 0.8:
            break
        means.append(float(d[active].mean()))
        batch.step(act)
    batch.close()
    diffs = np.diff(means)
    flee_ok = bool((diffs >= -1e-6).all()) and len(means) > 50

    # (b) noise off: batched policy equals the closed-form kernel to 1e-12
    from quadarena.npc import SheepParams
    params = SheepParams.from_config(CFG)
    params = SheepParams(params.sense_radius, params.k_repulse,
                         params.k_cohere, 0.0, params.v_max, params.a_max)
    rng = np.random.default_rng(5)
    pos = rng.uniform(0, 8, size=(50, 11, 2))
    out = batch_sheep_accel(pos, [0, 1], list(range(2, 11)), params)
    kernel_ok = True
    for e in range(50):
        herd = [tuple(pos[e, k]) for k in range(2, 11)]
        for k in range(9):
            ax, ay = sheep_policy(tuple(pos[e, 2 + k]),
                                  [tuple(pos[e, 0]), tuple(pos[e, 1])],
                                  herd, params)
            kernel_ok &= abs(out[e, k, 0] - ax) <= 1e-12
            kernel_ok &= abs(out[e, k, 1] - ay) <= 1e-12

    # (c) defender settles on the ball-goal midpoint in a static scene
    batch = EnvBatch("football_2v1", 4, master_seed=3)
    batch.reset()
    ball = batch.task.geom["ball"]
    goal = batch.task.geom["goal_east"]
    for _ in range(150):                       # 3 s, attackers idle
        batch.step(np.zeros((4, 2, 3)))
    mid_x = 0.5 * (batch.sim.pos[:, ball, 0] + goal[0])
    mid_y = 0.5 * (batch.sim.pos[:, ball, 1] + goal[1])
    defender = batch.task.ctrl_map[-1]
    err = np.hypot(batch.sim.pos[:, defender, 0] - mid_x,
                   batch.sim.pos[:, defender, 1] - mid_y)
    defender_ok = bool((err <= 0.1).all())
    batch.close()

    ok = flee_ok and kernel_ok and defender_ok
    _report("npc-behavior", ok,
            f"(flee monotone {flee_ok} over {len(means)} steps, kernel 1e-12 "
            f"{kernel_ok}, defender err {float(err.max()):.3f} m)")


# ---------------------------------------------------------------------------
# 6. Throughput
# ---------------------------------------------------------------------------

def test_throughput_targets():
    if BACKEND != "compiled":
        pytest.skip("throughput target applies to the compiled kernel")
    b500 = EnvBatch("narrow_gate", 500, master_seed=0)
    r500 = bench(b500, 250, policy="random", trials=3, warmup=30)
    b500.close()
    b1000 = EnvBatch("narrow_gate", 1000, master_seed=0)
    r1000 = bench(b1000, 250, policy="random", trials=3, warmup=30)
    b1000.close()
    rate500 = r500["agent_steps_per_sec_mean"]
    rate1000 = r1000["agent_steps_per_sec_mean"]

    b = EnvBatch("narrow_gate", 500, master_seed=0)
    rz = bench(b, 250, policy="zero", trials=3, warmup=30)
    b.close()
    zero_gap = abs(rz["agent_steps_per_sec_mean"] - rate500) / rate500

    # report structure mirrors the published table: mean +/- std per
    # (task x env count) cell
    for rep in (r500, r1000, rz):
        assert {"agent_steps_per_sec_mean", "agent_steps_per_sec_std",
                "task", "n_envs", "trials"} <= set(rep)

    ok = rate500 >= 50_000 and rate1000 > rate500 and zero_gap < 0.20
    _report("throughput", ok,
            f"(500 envs {rate500:,.0f} +/- {r500['agent_steps_per_sec_std']:,.0f} "
            f"agent-steps/s, 1000 envs {rate1000:,.0f}, zero-policy gap "
            f"{zero_gap:.1%})")


def test_replay_speed_500_envs(tmp_path):
    path = tmp_path / "big.jsonl"
    batch = EnvBatch("narrow_gate", 500, master_seed=2)
    pol = get_policy("random", batch.task)
    rec = TrajectoryRecorder(str(path), batch)
    batch.recorder = rec
    batch.reset()
    for _ in range(100):
        batch.step(pol(batch))
    rec.close()
    batch.close()
    rep = replay_verify(path)
    ok = rep["elapsed_s"] < 10.0 and rep["max_abs_discrepancy"] == 0.0
    _report("replay-speed", ok,
            f"({rep['rows']} rows in {rep['elapsed_s']:.1f}s)")


# ---------------------------------------------------------------------------
# 7. Reward taxonomy dominance
# ---------------------------------------------------------------------------

def test_reward_taxonomy_dominance():
    batch = EnvBatch("narrow_gate", 1, master_seed=1)
    pol = get_policy("scripted:narrow_gate_solver", batch.task)
    batch.reset()
    pol.reset(batch)
    kinds = {s.name: s.kind for s in batch.task.reward_terms}
    state_based = 0.0
    change_based = 0.0
    done = False
    for _ in range(batch.task.episode_len):
        res = batch.step(pol(batch))
        for name, v in batch._last_terms.items():
            if kinds[name] == "change":
                change_based += float(v[0])
            else:
                state_based += float(v[0])
        if res.infos[0] is not None:
            done = res.infos[0]["outcome"] == "success"
            break
    batch.close()
    ok = done and state_based > change_based
    _report("reward-taxonomy-dominance", ok,
            f"(state-based {state_based:.2f} > change-based {change_based:.2f} "
            f"on a successful episode: {state_based > change_based})")
