"""Scripted non-player characters: flocking sheep and the football defender.

Sheep follow three rules: flee nearby dogs with intensity growing as the dog
closes, drift toward the herd centroid, and carry white acceleration noise.
The defender keeps itself on the midpoint between the ball and the goal it
guards, facing the ball.

Each function exists twice: a scalar reference (the behavioral contract,
used by tests) and a batched numpy twin used on the hot path. The twins
perform the same operations in the same order, so they agree to the last
bit when fed the same state.
"""

import math
from dataclasses import dataclass

import numpy as np

from .locomotion import VelocityCommand

__all__ = ["SheepParams", "DefenderParams", "sheep_policy", "defender_policy",
           "batch_sheep_accel", "batch_defender_cmd"]


@dataclass(frozen=True)
class SheepParams:
    sense_radius: float = 5.0
    k_repulse: float = 8.0
    k_cohere: float = 1.2
    noise_sigma: float = 0.6
    v_max: float = 1.8
    a_max: float = 6.0

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg["sheep.sense_radius"], cfg["sheep.k_repulse"],
                   cfg["sheep.k_cohere"], cfg["sheep.noise_sigma"],
                   cfg["sheep.v_max"], cfg["sheep.a_max"])


@dataclass(frozen=True)
class DefenderParams:
    speed: float
    goal_anchor: tuple
    arrive_tol: float = 0.05
    approach_gain: float = 3.0
    yaw_gain: float = 3.0
    max_yaw_rate: float = 2.0


def sheep_policy(sheep_pos, dog_positions, herd_positions, params, rng=None):
    """Acceleration (ax, ay) for one sheep.

    Repulsion sums k_repulse * max(0, 1/d - 1/sense_radius) away from each
    dog; cohesion pulls toward the herd centroid; optional Gaussian noise is
    drawn per axis from rng. The result is clamped to a_max.
    """
    sx, sy = sheep_pos
    ax = 0.0
    ay = 0.0
    for dx_, dy_ in dog_positions:
        ex = sx - dx_
        ey = sy - dy_
        d = math.sqrt(ex * ex + ey * ey)
        if d < 1e-9 or d >= params.sense_radius:
            continue
        w = params.k_repulse * (1.0 / d - 1.0 / params.sense_radius)
        ax += w * (ex / d)
        ay += w * (ey / d)
    n = len(herd_positions)
    cx = 0.0
    cy = 0.0
    for hx, hy in herd_positions:
        cx += hx
        cy += hy
    cx /= n
    cy /= n
    ax += params.k_cohere * (cx - sx)
    ay += params.k_cohere * (cy - sy)
    if rng is not None and params.noise_sigma > 0.0:
        ax += params.noise_sigma * rng.standard_normal()
        ay += params.noise_sigma * rng.standard_normal()
    mag2 = ax * ax + ay * ay
    if mag2 > params.a_max * params.a_max:
        s = params.a_max / math.sqrt(mag2)
        ax *= s
        ay *= s
    return (ax, ay)


def batch_sheep_accel(pos, dog_idx, sheep_idx, params, noise=None, out=None):
    """Sheep accelerations for a whole batch: pos is (E, B, 2).

    noise, when given, is (E, NS, 2) pre-drawn Gaussian deltas already scaled
    by sigma's unit draw (i.e. standard normal); it is added before the a_max
    clamp, matching the scalar policy.
    """
    E = pos.shape[0]
    ns = len(sheep_idx)
    out = np.zeros((E, ns, 2)) if out is None else out
    out[:] = 0.0
    sp = pos[:, sheep_idx, :]                      # (E, NS, 2)
    for d in dog_idx:
        delta = sp - pos[:, d, None, :]            # (E, NS, 2)
        dist = np.sqrt(delta[..., 0] ** 2 + delta[..., 1] ** 2)
        w = params.k_repulse * (1.0 / np.maximum(dist, 1e-9)
                                - 1.0 / params.sense_radius)
        w = np.where((dist < 1e-9) | (dist >= params.sense_radius), 0.0, w)
        out[..., 0] += w * (delta[..., 0] / np.maximum(dist, 1e-9))
        out[..., 1] += w * (delta[..., 1] / np.maximum(dist, 1e-9))
    # sequential accumulation matches the scalar reference bit-for-bit
    centroid = sp[:, 0, :].copy()
    for k in range(1, ns):
        centroid += sp[:, k, :]
    centroid /= ns
    out[..., 0] += params.k_cohere * (centroid[:, None, 0] - sp[..., 0])
    out[..., 1] += params.k_cohere * (centroid[:, None, 1] - sp[..., 1])
    if noise is not None:
        out += params.noise_sigma * noise
    mag2 = out[..., 0] ** 2 + out[..., 1] ** 2
    over = mag2 > params.a_max * params.a_max
    if np.any(over):
        scale = params.a_max / np.sqrt(np.where(over, mag2, 1.0))
        out[..., 0] = np.where(over, out[..., 0] * scale, out[..., 0])
        out[..., 1] = np.where(over, out[..., 1] * scale, out[..., 1])
    return out


def defender_policy(ball_pos, params, self_pos, self_yaw):
    """Velocity command holding the midpoint between ball and guarded goal."""
    tx = 0.5 * (ball_pos[0] + params.goal_anchor[0])
    ty = 0.5 * (ball_pos[1] + params.goal_anchor[1])
    dx = tx - self_pos[0]
    dy = ty - self_pos[1]
    dist = math.sqrt(dx * dx + dy * dy)
    bearing = math.atan2(ball_pos[1] - self_pos[1], ball_pos[0] - self_pos[0])
    err = _wrap_pi(bearing - self_yaw)
    wz = params.yaw_gain * err
    wz = max(-params.max_yaw_rate, min(params.max_yaw_rate, wz))
    if dist <= params.arrive_tol:
        return VelocityCommand(0.0, 0.0, wz)
    speed = min(params.speed, params.approach_gain * dist)
    wvx = speed * (dx / dist)
    wvy = speed * (dy / dist)
    cs, sn = math.cos(self_yaw), math.sin(self_yaw)
    return VelocityCommand(cs * wvx + sn * wvy, -sn * wvx + cs * wvy, wz)


def batch_defender_cmd(pos, yaw, ball_idx, defender_idx, params, out, row):
    """Write the defender command rows into a batch action array (E, NC, 3)."""
    bx = pos[:, ball_idx, 0]
    by = pos[:, ball_idx, 1]
    sx = pos[:, defender_idx, 0]
    sy = pos[:, defender_idx, 1]
    syaw = yaw[:, defender_idx]
    tx = 0.5 * (bx + params.goal_anchor[0])
    ty = 0.5 * (by + params.goal_anchor[1])
    dx = tx - sx
    dy = ty - sy
    dist = np.sqrt(dx * dx + dy * dy)
    bearing = np.arctan2(by - sy, bx - sx)
    err = bearing - syaw
    err = (err + np.pi) % (2.0 * np.pi) - np.pi
    wz = np.clip(params.yaw_gain * err, -params.max_yaw_rate, params.max_yaw_rate)
    speed = np.minimum(params.speed, params.approach_gain * dist)
    safe = np.maximum(dist, 1e-12)
    wvx = speed * (dx / safe)
    wvy = speed * (dy / safe)
    cs, sn = np.cos(syaw), np.sin(syaw)
    vx = cs * wvx + sn * wvy
    vy = -sn * wvx + cs * wvy
    arrived = dist <= params.arrive_tol
    out[:, row, 0] = np.where(arrived, 0.0, vx)
    out[:, row, 1] = np.where(arrived, 0.0, vy)
    out[:, row, 2] = wz
    return out


def _wrap_pi(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi
