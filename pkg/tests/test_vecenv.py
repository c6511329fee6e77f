import hashlib

import numpy as np
import pytest

import quadarena as qa
from quadarena.config import ConfigError
from quadarena.vecenv import EnvBatch, EnvFault, bench


def test_zero_envs_rejected():
    with pytest.raises(ConfigError):
        EnvBatch("narrow_gate", 0, 0)


def test_obs_shape_matches_spaces():
    b = EnvBatch("narrow_gate", 50, master_seed=1)
    obs = b.reset()
    meta = b.spaces()
    assert obs.shape == (50, meta["n_agents"], meta["obs_dim"]) == (50, 2, 13)
    res = b.step(np.zeros((50, 2, 3)))
    assert res.obs.shape == (50, 2, 13)
    assert res.rewards.shape == (50, 2)
    assert res.dones.shape == (50,)
    priv = b.privileged_obs()
    assert priv.shape == (50, 2, meta["privileged_obs_dim"])
    assert np.array_equal(priv[..., :13], res.obs)
    b.close()


def test_same_seed_identical_batches():
    b1 = EnvBatch("sheepdog_easy", 6, master_seed=9)
    b2 = EnvBatch("sheepdog_easy", 6, master_seed=9)
    assert b1.reset().tobytes() == b2.reset().tobytes()
    rng = np.random.default_rng(0)
    for _ in range(40):
        act = rng.uniform(-1, 1, size=(6, 2, 3))
        r1, r2 = b1.step(act), b2.step(act.copy())
        assert r1.obs.tobytes() == r2.obs.tobytes()
        assert r1.rewards.tobytes() == r2.rewards.tobytes()
        assert r1.dones.tobytes() == r2.dones.tobytes()
    b1.close(); b2.close()


def test_action_shape_fault_before_advancing():
    b = EnvBatch("narrow_gate", 3, master_seed=0)
    b.reset()
    state = b.sim.pos.copy()
    with pytest.raises(EnvFault, match="shape"):
        b.step(np.zeros((3, 2, 2)))
    assert np.array_equal(b.sim.pos, state)
    assert b.step_counts.sum() == 0
    b.close()


def test_non_finite_action_names_env_agent():
    b = EnvBatch("narrow_gate", 3, master_seed=0)
    b.reset()
    act = np.zeros((3, 2, 3))
    act[2, 1, 0] = float("inf")
    with pytest.raises(EnvFault, match="env 2 agent 1"):
        b.step(act)
    b.close()


def test_worker_count_invariance():
    def stream(workers):
        b = EnvBatch("push_box", 9, master_seed=5, workers=workers)
        rng = np.random.default_rng(1)
        b.reset()
        h = hashlib.sha256()
        for _ in range(60):
            res = b.step(rng.uniform(-1.5, 1.5, size=(9, 2, 3)))
            h.update(res.obs.tobytes())
            h.update(res.rewards.tobytes())
        b.close()
        return h.hexdigest()

    assert stream(1) == stream(2) == stream(8)


def test_env_isolation():
    def run(perturb):
        b = EnvBatch("narrow_gate", 4, master_seed=3)
        rng = np.random.default_rng(2)
        b.reset()
        rows = []
        for _ in range(40):
            act = rng.uniform(-1.5, 1.5, size=(4, 2, 3))
            if perturb:
                act[1] = -act[1]          # env 1 takes different actions
            res = b.step(act)
            rows.append((res.obs[0].copy(), res.obs[2].copy(),
                         res.obs[3].copy()))
        b.close()
        return rows

    base, alt = run(False), run(True)
    for (a0, a2, a3), (b0, b2, b3) in zip(base, alt):
        assert np.array_equal(a0, b0)
        assert np.array_equal(a2, b2)
        assert np.array_equal(a3, b3)


def test_auto_reset_semantics():
    b = EnvBatch("narrow_gate", 2, master_seed=0)
    b.reset()
    act = np.zeros((2, 2, 3))
    for i in range(b.task.episode_len):
        res = b.step(act)
    assert res.dones.all()
    for e, info in enumerate(res.infos):
        assert info["outcome"] == "timeout"
        assert info["episode_len"] == b.task.episode_len
        assert info["terminal_obs"].shape == (2, 13)
    # the batch auto-reset inside the call: counters are back at zero and the
    # returned obs reflect the fresh episode (not the terminal one)
    assert (b.step_counts == 0).all()
    assert not np.array_equal(res.obs[0], res.infos[0]["terminal_obs"])
    res2 = b.step(act)
    assert (b.step_counts == 1).all()
    assert not res2.dones.any()
    b.close()


def test_static_scene_no_success_at_step_one():
    b = EnvBatch("narrow_gate", 8, master_seed=1)
    b.reset()
    res = b.step(np.zeros((8, 2, 3)))
    assert not res.dones.any()
    assert (b._last_terms["gate_crossed"] == 0.0).all()
    b.close()


def test_bench_report_shape():
    b = EnvBatch("narrow_gate", 16, master_seed=0)
    rep = bench(b, 30, policy="zero", trials=2, warmup=5)
    assert rep["n_envs"] == 16 and rep["trials"] == 2
    assert rep["agent_steps_per_sec_mean"] > 0
    assert rep["agent_steps_per_sec_std"] >= 0
    assert set(rep["phase_fraction"]) <= {"npc", "kernel", "rewards", "obs",
                                          "reset"}
    b.close()


def test_bench_rejects_zero_steps():
    b = EnvBatch("narrow_gate", 2, master_seed=0)
    with pytest.raises(ConfigError):
        bench(b, 0)
    b.close()
