import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadarena import locomotion as L
from quadarena import physics as P
from quadarena import terrain as T
from quadarena.config import Config
from quadarena.core import Body, CLASS_AGENT, Sim

CFG = Config()


def robot_body(**kw):
    defaults = dict(id=0, shape=P.Disc(CFG["robot.radius"]), pose=(0, 0, 0),
                    mass=CFG["robot.mass"], friction_mu=CFG["robot.friction"],
                    body_class="robot")
    defaults.update(kw)
    return P.RigidBody(**defaults)


def tracking_sim(n_envs=1):
    arena = T.compose_track([T.Flat((60.0, 60.0))], perimeter=False)
    bodies = [Body("r", ("disc", CFG["robot.radius"]), CFG["robot.mass"],
                   CFG["robot.friction"], CLASS_AGENT)]
    sim = Sim(n_envs, bodies, arena, CFG, ctrl_map=(0,))
    for e in range(n_envs):
        sim.reset_env(e)
        sim.pos[e, 0] = (30.0, 0.0)
    return sim


def drive(sim, cmd, steps):
    c = np.zeros((sim.n_envs, 1, 3))
    c[:, 0] = cmd
    for _ in range(steps):
        sim.step_range(0, sim.n_envs, 0, cmd=c)


def body_frame_vel(sim, e=0):
    cs, sn = math.cos(sim.yaw[e, 0]), math.sin(sim.yaw[e, 0])
    vx, vy = sim.vel[e, 0]
    return (cs * vx + sn * vy, -sn * vx + cs * vy)


@pytest.mark.parametrize("cmd", [(1.0, 0.0, 0.0), (1.5, 0.0, 0.0),
                                 (-1.5, 1.0, 0.0), (0.3, -1.0, 0.0)])
def test_tracking_convergence_linear(cmd):
    sim = tracking_sim()
    drive(sim, cmd, 50)          # 1 s
    bvx, bvy = body_frame_vel(sim)
    assert abs(bvx - cmd[0]) < 1e-3
    assert abs(bvy - cmd[1]) < 1e-3
    drive(sim, cmd, 25)          # stays converged
    bvx, bvy = body_frame_vel(sim)
    assert abs(bvx - cmd[0]) < 1e-3 and abs(bvy - cmd[1]) < 1e-3


def test_tracking_convergence_yaw_rate():
    sim = tracking_sim()
    drive(sim, (0.0, 0.0, 2.0), 50)
    assert abs(sim.omg[0, 0] - 2.0) < 1e-3


def test_zero_command_stays_at_rest():
    sim = tracking_sim()
    drive(sim, (0.0, 0.0, 0.0), 25)
    assert np.allclose(sim.vel[0, 0], 0.0)
    assert tuple(sim.pos[0, 0]) == (30.0, 0.0)


def test_command_clipping_equivalence():
    r = robot_body(lin_vel=(0.2, -0.1), yaw_rate=0.3)
    wild = L.VelocityCommand(9.0, -4.0, 7.0)
    clipped = L.clip_command(wild, CFG)
    assert (clipped.vx, clipped.vy, clipped.yaw_rate) == (1.5, -1.0, 2.0)
    assert L.track_command(r, wild, CFG) == L.track_command(r, clipped, CFG)


@settings(max_examples=60, deadline=None)
@given(vx=st.floats(-5, 5), vy=st.floats(-5, 5), wz=st.floats(-5, 5),
       yaw=st.floats(-math.pi, math.pi),
       rvx=st.floats(-2, 2), rvy=st.floats(-2, 2))
def test_force_cap_property(vx, vy, wz, yaw, rvx, rvy):
    r = robot_body(pose=(0, 0, yaw), lin_vel=(rvx, rvy))
    fx, fy, tz = L.track_command(r, L.VelocityCommand(vx, vy, wz), CFG)
    fmax = (CFG["locomotion.f_max_scale"] * r.mass * CFG["physics.gravity"]
            * r.friction_mu)
    assert math.hypot(fx, fy) <= fmax * (1 + 1e-12)
    assert abs(tz) <= fmax * r.shape.radius * (1 + 1e-12)


def test_fallen_robot_zero_wrench():
    r = robot_body(lin_vel=(1.0, 0.0))
    assert L.track_command(r, L.VelocityCommand(1.5, 0, 0), CFG,
                           upright=False) == (0.0, 0.0, 0.0)


def test_wall_press_saturates_at_fmax():
    """Steady contact force against an unyielding obstacle equals F_max.

    Oracle: a frictionless measuring slab of huge mass; the contact force is
    its momentum gain per unit time (pure kinematics, no controller math).
    """
    arena = T.compose_track([T.Flat((60.0, 60.0))], perimeter=False)
    M = 1e7
    bodies = [Body("r", ("disc", CFG["robot.radius"]), CFG["robot.mass"],
                   CFG["robot.friction"], CLASS_AGENT),
              Body("slab", ("rect", 0.5, 3.0), M, 0.0, 3)]
    sim = Sim(1, bodies, arena, CFG, ctrl_map=(0,))
    sim.reset_env(0)
    sim.pos[0, 0] = (29.0, 0.0)
    sim.pos[0, 1] = (29.9, 0.0)
    cmd = np.zeros((1, 1, 3))
    cmd[0, 0] = (1.5, 0.0, 0.0)
    for _ in range(50):                      # settle into steady pressing
        sim.step_range(0, 1, 0, cmd=cmd)
    p0 = M * sim.vel[0, 1, 0]
    window = 50
    for _ in range(window):
        sim.step_range(0, 1, 0, cmd=cmd)
    p1 = M * sim.vel[0, 1, 0]
    force = (p1 - p0) / (window * CFG["physics.dt"])
    fmax = (CFG["locomotion.f_max_scale"] * CFG["robot.mass"]
            * CFG["physics.gravity"] * CFG["robot.friction"])
    assert abs(force - fmax) / fmax < 0.05
    assert abs(sim.vel[0, 0, 0]) < 0.02      # robot itself barely moves


# --------------------------------------------------------------------------
# stability
# --------------------------------------------------------------------------

def _arena():
    return T.compose_track([T.Flat((10.0, 10.0))])


def test_update_stability_nominal():
    r = robot_body(pose=(5.0, 0.0, 0.0))
    s = L.update_stability(r, L.RobotStatus(), _arena(), 0.02, cfg=CFG)
    assert s.upright


def test_update_stability_support_drop():
    arena = T.compose_track([T.SumoRing(1.5, 0.6, (6.0, 6.0))])
    r = robot_body(pose=(0.5, 0.0, 0.0), height=0.6)   # off the ring platform
    s = L.update_stability(r, L.RobotStatus(), arena, 0.02, cfg=CFG)
    assert not s.upright


def test_update_stability_impulse_window():
    """A 30 N s burst within the window topples (direct accumulation oracle)."""
    r = robot_body(pose=(5.0, 0.0, 0.0))
    s = L.RobotStatus()
    # 30 N s delivered over 3 control steps, well inside the 0.2 s window
    for imp in (10.0, 10.0, 10.0):
        s = L.update_stability(r, s, _arena(), 0.02, step_impulse=imp, cfg=CFG)
    assert not s.upright
    assert s.lateral_impulse_window > CFG["locomotion.topple_impulse"]


def test_update_stability_window_slides():
    r = robot_body(pose=(5.0, 0.0, 0.0))
    s = L.RobotStatus()
    s = L.update_stability(r, s, _arena(), 0.02, step_impulse=20.0, cfg=CFG)
    for _ in range(12):      # impulse leaves the 10-step window
        s = L.update_stability(r, s, _arena(), 0.02, step_impulse=0.0, cfg=CFG)
    assert s.upright
    assert s.lateral_impulse_window == 0.0


def test_fall_latches():
    r = robot_body(pose=(5.0, 0.0, 0.0))
    s = L.RobotStatus(upright=False)
    s2 = L.update_stability(r, s, _arena(), 0.02, cfg=CFG)
    assert not s2.upright
