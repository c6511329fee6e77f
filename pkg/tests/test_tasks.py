import json
import math
import os

import numpy as np
import pytest

import quadarena as qa
from quadarena.config import Config, ConfigError
from quadarena.tasks import (TASK_IDS, build_observation, build_task,
                             layout_table, spaces)

CFG = Config()

# The published reward table for the collaborative tasks, term by term.
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


def test_registry_has_twelve_tasks():
    assert len(TASK_IDS) == 12
    for tid in TASK_IDS:
        t = build_task(tid, CFG)
        assert t.id == tid


def test_unknown_task_error_lists_ids():
    with pytest.raises(ConfigError) as exc:
        build_task("bogus", CFG)
    for tid in TASK_IDS:
        assert tid in str(exc.value)


def test_reward_scales_match_published_table():
    for tid, table in PUBLISHED_SCALES.items():
        t = build_task(tid, CFG)
        got = {s.name: s.scale for s in t.reward_terms}
        assert got == table, f"{tid}: {got} != {table}"


def test_collaborative_vs_competitive_split():
    for tid in TASK_IDS[:6]:
        assert build_task(tid, CFG).collaborative
    for tid in TASK_IDS[6:]:
        t = build_task(tid, CFG)
        assert not t.collaborative and len(t.teams) == 2


def test_obs_dims():
    expected = {
        "narrow_gate": 13,       # 7 ego + 4 teammate + 2 gate anchor
        "sumo": 13, "traverse_bridge": 13,
        "sheepdog_easy": 17, "push_box": 17, "push_cylinder": 17,
        "football_1v1": 17,
        "climb_seesaw": 19, "revolving_door": 19,
        "football_2v1": 21,
        "football_2v2": 25,
        "sheepdog_hard": 7 + 4 + 9 * 4 + 2,   # nine sheep entity slots
    }
    for tid, dim in expected.items():
        t = build_task(tid, CFG)
        assert t.obs_dim == dim, f"{tid}: {t.obs_dim} != {dim}"
        for a in range(t.n_agents):
            got = sum(7 if s[0] == "ego" else (2 if s[0] == "anchor" else 4)
                      for s in t.obs_layout[a])
            assert got == dim


def test_spaces_metadata():
    t = build_task("narrow_gate", CFG)
    meta = spaces(t)
    assert meta["n_agents"] == 2 and meta["action_dim"] == 3
    assert meta["action_high"] == [1.5, 1.0, 2.0]
    meta = spaces(build_task("football_2v2", CFG))
    assert meta["n_agents"] == 4 and meta["n_teams"] == 2
    meta = spaces(build_task("sheepdog_hard", CFG))
    assert meta["obs_dim"] == 49


def test_sheepdog_hard_has_nine_sheep():
    t = build_task("sheepdog_hard", CFG)
    assert len(t.sheep_map) == 9
    b = qa.EnvBatch(t, 2, master_seed=7)
    b.reset()
    assert len(t.bodies) == 2 + 9
    b.close()


def test_observation_ego_frame_examples():
    b = qa.EnvBatch("narrow_gate", 1, master_seed=0)
    b.reset()
    gate = b.task.geom["gate_center"]
    # agent 0 three meters west of the gate, facing +x
    b.sim.pos[0, 0] = (gate[0] - 3.0, gate[1])
    b.sim.yaw[0, 0] = 0.0
    b.sim.vel[0, 0] = 0.0
    obs = build_observation(b.task, b.sim, 0, 0)
    # anchor slot is the last two entries
    assert obs[-2] == pytest.approx(3.0, abs=1e-12)
    assert obs[-1] == pytest.approx(0.0, abs=1e-12)
    # same scene, agent yawed to face +y: gate appears at (0, -3)
    b.sim.yaw[0, 0] = math.pi / 2
    obs = build_observation(b.task, b.sim, 0, 0)
    assert obs[-2] == pytest.approx(0.0, abs=1e-12)
    assert obs[-1] == pytest.approx(-3.0, abs=1e-12)
    b.close()


def test_observation_unknown_agent_faults():
    b = qa.EnvBatch("narrow_gate", 1, master_seed=0)
    b.reset()
    with pytest.raises(KeyError):
        build_observation(b.task, b.sim, 0, 5)
    b.close()


def test_reset_determinism_bitwise():
    b1 = qa.EnvBatch("push_box", 4, master_seed=7)
    b2 = qa.EnvBatch("push_box", 4, master_seed=7)
    o1, o2 = b1.reset(), b2.reset()
    assert o1.tobytes() == o2.tobytes()
    assert b1.sim.pos.tobytes() == b2.sim.pos.tobytes()
    assert b1.sim.yaw.tobytes() == b2.sim.yaw.tobytes()
    b1.close(); b2.close()


def test_push_box_respawns_box():
    b = qa.EnvBatch("push_box", 1, master_seed=3)
    b.reset()
    first = b.sim.pos[0, 2].copy()
    g = b.task.spawn_groups[1]
    assert g.rect[0] <= first[0] <= g.rect[2]
    # drag the box away, then force a reset and check it returns to the zone
    b.sim.pos[0, 2] = (8.0, 2.0)
    b._reset_env(0)
    again = b.sim.pos[0, 2]
    assert g.rect[0] <= again[0] <= g.rect[2]
    assert g.rect[1] <= again[1] <= g.rect[3]
    b.close()


def test_narrow_gate_spawns_west_of_gate():
    b = qa.EnvBatch("narrow_gate", 16, master_seed=5)
    b.reset()
    gate_x = b.task.geom["gate_x"]
    assert (b.sim.pos[:, :2, 0] < gate_x).all()
    b.close()


def test_layout_table_matches_shipped_doc():
    table = layout_table(CFG)
    path = os.path.join(os.path.dirname(__file__), "..", "docs",
                        "observation_layout.json")
    with open(path, "r", encoding="utf-8") as fh:
        shipped = json.load(fh)
    assert table == shipped


def test_seesaw_initially_ramped():
    b = qa.EnvBatch("climb_seesaw", 2, master_seed=1)
    b.reset()
    ss = b.task.arena.seesaw
    assert np.allclose(b.sim.hinge_ang, ss.angle_limits[1])
    b.close()
