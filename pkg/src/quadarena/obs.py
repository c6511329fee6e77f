"""Batched observation construction.

Layouts are fixed per task (tasks.py); entries are exact state values with
no sensor noise. The privileged variant appends one global block per env --
absolute pose and velocity of every body plus hinge state -- for critic use.
"""

import numpy as np

__all__ = ["build_obs", "build_privileged"]


def build_obs(task, sim, out, idx=None):
    """Fill out[idx, :, :] with per-agent observations from sim state."""
    sel = slice(None) if idx is None else idx
    pos = sim.pos[sel]
    yaw = sim.yaw[sel]
    vel = sim.vel[sel]
    omg = sim.omg[sel]
    ha = sim.hinge_ang[sel]
    ho = sim.hinge_omg[sel]
    ss = task.arena.seesaw
    for a in range(task.n_agents):
        cs = np.cos(yaw[:, a])
        sn = np.sin(yaw[:, a])
        col = 0
        view = out[sel]
        for slot in task.obs_layout[a]:
            kind = slot[0]
            if kind == "ego":
                view[:, a, 0] = pos[:, a, 0]
                view[:, a, 1] = pos[:, a, 1]
                view[:, a, 2] = cs
                view[:, a, 3] = sn
                view[:, a, 4] = vel[:, a, 0]
                view[:, a, 5] = vel[:, a, 1]
                view[:, a, 6] = omg[:, a]
                col = 7
                continue
            if kind == "ent":
                b = slot[1]
                px, py = pos[:, b, 0], pos[:, b, 1]
                vx, vy = vel[:, b, 0], vel[:, b, 1]
            elif kind == "plank_tip":
                sin_t = np.sin(ha)
                cos_t = np.cos(ha)
                px = ss.pivot[0] + ss.half_len * cos_t
                py = np.full_like(ha, ss.pivot[1])
                vx = -ss.half_len * sin_t * ho
                vy = np.zeros_like(ha)
            elif kind == "door_tip":
                d = task.door_body
                cd = np.cos(yaw[:, d])
                sd = np.sin(yaw[:, d])
                hl = sim.half_w[d]
                px = pos[:, d, 0] + hl * cd
                py = pos[:, d, 1] + hl * sd
                vx = omg[:, d] * (-(hl * sd))
                vy = omg[:, d] * (hl * cd)
            else:  # anchor
                ax, ay = slot[1]
                rx = ax - pos[:, a, 0]
                ry = ay - pos[:, a, 1]
                view[:, a, col] = cs * rx + sn * ry
                view[:, a, col + 1] = -sn * rx + cs * ry
                col += 2
                continue
            rx = px - pos[:, a, 0]
            ry = py - pos[:, a, 1]
            rvx = vx - vel[:, a, 0]
            rvy = vy - vel[:, a, 1]
            view[:, a, col] = cs * rx + sn * ry
            view[:, a, col + 1] = -sn * rx + cs * ry
            view[:, a, col + 2] = cs * rvx + sn * rvy
            view[:, a, col + 3] = -sn * rvx + cs * rvy
            col += 4
        if idx is not None:
            out[sel] = view
    return out


def build_privileged(task, sim, obs, out, idx=None):
    """obs plus the absolute state of every body (and hinge, if any)."""
    sel = slice(None) if idx is None else idx
    D = task.obs_dim
    view = out[sel]
    view[:, :, :D] = obs[sel]
    B = len(task.bodies)
    block = np.empty((view.shape[0], 7 * B + (2 if task.arena.seesaw else 0)))
    for b in range(B):
        block[:, 7 * b + 0] = sim.pos[sel, b, 0]
        block[:, 7 * b + 1] = sim.pos[sel, b, 1]
        block[:, 7 * b + 2] = np.cos(sim.yaw[sel, b])
        block[:, 7 * b + 3] = np.sin(sim.yaw[sel, b])
        block[:, 7 * b + 4] = sim.vel[sel, b, 0]
        block[:, 7 * b + 5] = sim.vel[sel, b, 1]
        block[:, 7 * b + 6] = sim.omg[sel, b]
    if task.arena.seesaw is not None:
        block[:, 7 * B] = sim.hinge_ang[sel]
        block[:, 7 * B + 1] = sim.hinge_omg[sel]
    view[:, :, D:] = block[:, None, :]
    if idx is not None:
        out[sel] = view
    return out
