"""Hierarchical control layer: velocity commands to body wrenches.

A robot is driven by a first-order velocity-tracking controller with a force
cap modeling finite actuation; heavy objects therefore resist a single
pusher. Stability is a two-condition model: a robot falls when its support
drops away under it, or when the lateral contact impulse accumulated over a
short sliding window exceeds a threshold.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import Config
from .terrain import height_at

__all__ = ["VelocityCommand", "RobotStatus", "clip_command", "clip_actions",
           "track_command", "update_stability"]


@dataclass(frozen=True)
class VelocityCommand:
    vx: float = 0.0        # body-frame forward [m/s]
    vy: float = 0.0        # body-frame lateral [m/s]
    yaw_rate: float = 0.0  # [rad/s]


def clip_command(cmd, cfg):
    def clamp(v, lim):
        return -lim if v < -lim else (lim if v > lim else v)
    return VelocityCommand(
        clamp(cmd.vx, cfg["locomotion.max_vx"]),
        clamp(cmd.vy, cfg["locomotion.max_vy"]),
        clamp(cmd.yaw_rate, cfg["locomotion.max_yaw_rate"]))


def clip_actions(actions, cfg, out=None):
    """Clip an (..., 3) action array to the command bounds in place-able form."""
    out = np.empty_like(actions) if out is None else out
    np.clip(actions[..., 0], -cfg["locomotion.max_vx"], cfg["locomotion.max_vx"],
            out=out[..., 0])
    np.clip(actions[..., 1], -cfg["locomotion.max_vy"], cfg["locomotion.max_vy"],
            out=out[..., 1])
    np.clip(actions[..., 2], -cfg["locomotion.max_yaw_rate"],
            cfg["locomotion.max_yaw_rate"], out=out[..., 2])
    return out


def track_command(robot, cmd, cfg=None, upright=True):
    """Wrench (fx, fy, torque) realizing a velocity command on a robot body.

    First-order tracking toward the world-frame command with a centripetal
    feed-forward term for commanded turns; force capped at
    f_max_scale * m * g * mu. A fallen robot produces a zero wrench. The math
    mirrors the kernel exactly.
    """
    cfg = cfg or Config()
    if not upright:
        return (0.0, 0.0, 0.0)
    c = clip_command(cmd, cfg)
    cs, sn = math.cos(robot.pose[2]), math.sin(robot.pose[2])
    cwx = cs * c.vx - sn * c.vy
    cwy = sn * c.vx + cs * c.vy
    m = robot.mass
    kv = m / cfg["locomotion.tau"]
    fx = kv * (cwx - robot.lin_vel[0]) + m * c.yaw_rate * (-cwy)
    fy = kv * (cwy - robot.lin_vel[1]) + m * c.yaw_rate * cwx
    fmax = cfg["locomotion.f_max_scale"] * m * cfg["physics.gravity"] * robot.friction_mu
    fm2 = fx * fx + fy * fy
    if fm2 > fmax * fmax:
        s = fmax / math.sqrt(fm2)
        fx, fy = fx * s, fy * s
    inertia = robot.inertia
    if inertia is None:
        inertia = 0.5 * m * robot.shape.radius ** 2
    kw = inertia / cfg["locomotion.tau"]
    tz = kw * (c.yaw_rate - robot.yaw_rate)
    tmax = fmax * robot.shape.radius
    tz = -tmax if tz < -tmax else (tmax if tz > tmax else tz)
    return (fx, fy, tz)


@dataclass(frozen=True)
class RobotStatus:
    upright: bool = True
    impulse_window: tuple = ()   # recent per-step qualifying impulses [N s]
    airborne_time: float = 0.0

    @property
    def lateral_impulse_window(self):
        total = 0.0
        for v in self.impulse_window:
            total += v
        return total


def update_stability(robot, status, arena, dt, step_impulse=0.0, cfg=None,
                     seesaw_angle=None):
    """Advance a robot's stability status by one control step.

    The robot falls when (a) the support under its center drops more than
    fall_drop below its current height, or (b) the qualifying lateral contact
    impulse accumulated over the sliding window exceeds the topple threshold.
    Once fallen the status latches until reset.
    """
    cfg = cfg or Config()
    if not status.upright:
        return status
    window_steps = max(1, round(cfg["locomotion.impulse_window"] / cfg["physics.dt"]))
    window = (status.impulse_window + (float(step_impulse),))[-window_steps:]
    status = replace(status, impulse_window=window)

    support = height_at(arena, robot.pose[0], robot.pose[1],
                        seesaw_angle=seesaw_angle)
    if support < robot.height - cfg["physics.fall_drop"]:
        return replace(status, upright=False)
    if status.lateral_impulse_window > cfg["locomotion.topple_impulse"]:
        return replace(status, upright=False)
    return status
