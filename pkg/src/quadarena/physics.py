"""Single-world physics surface over the batched kernel.

These types and functions are the unit-level face of the engine: a
WorldState holds one environment's bodies and joints, step_world advances it
with externally supplied wrenches, and detect_contacts reports the current
overlap set. The vectorized environment bypasses this layer and drives the
kernel on whole batches; both paths execute the same kernel code.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import core
from .config import Config
from .terrain import height_at  # re-exported: support queries live with terrain

__all__ = [
    "Disc", "Rect", "Segment", "RigidBody", "HingeJoint", "WorldState",
    "Contact", "PhysicsFault", "step_world", "detect_contacts", "height_at",
    "seesaw_torque_balance",
]

_CLASS_CODES = {
    "robot": core.CLASS_AGENT,
    "npc": core.CLASS_SHEEP,
    "object": core.CLASS_OBJECT,
    "static": core.CLASS_OBJECT,
    "hinge_link": core.CLASS_PINNED,
}


class PhysicsFault(ValueError):
    """Non-finite force or state component; carries the offending body id."""

    def __init__(self, body_id, what):
        super().__init__(f"non-finite {what} on body {body_id}")
        self.body_id = body_id


@dataclass(frozen=True)
class Disc:
    radius: float


@dataclass(frozen=True)
class Rect:
    half_w: float
    half_h: float


@dataclass(frozen=True)
class Segment:
    a: tuple
    b: tuple
    z_top: float = 3.0


@dataclass(frozen=True)
class RigidBody:
    id: int
    shape: object
    pose: tuple                     # (x, y, yaw)
    height: float = 0.0
    lin_vel: tuple = (0.0, 0.0)
    yaw_rate: float = 0.0
    mass: float = math.inf          # infinite for statics
    inertia: float = None
    friction_mu: float = 0.5
    body_class: str = "object"

    def is_static(self):
        return not math.isfinite(self.mass) and self.body_class != "hinge_link"


@dataclass(frozen=True)
class HingeJoint:
    link_body: int
    axis: str                       # "vertical" (door) or "horizontal" (seesaw)
    pivot: tuple                    # (x, y, z)
    angle: float = 0.0
    ang_vel: float = 0.0
    limits: tuple = (-math.pi, math.pi)
    damping: float = 0.0


@dataclass(frozen=True)
class WorldState:
    bodies: tuple
    joints: tuple = ()
    time: float = 0.0
    step_count: int = 0
    arena: object = None

    def body(self, body_id):
        for b in self.bodies:
            if b.id == body_id:
                return b
        raise KeyError(f"no body {body_id}")


@dataclass(frozen=True)
class Contact:
    body_a: int
    body_b: int
    normal: tuple     # unit, points from a to b
    depth: float
    point: tuple


def _check_finite(body_id, what, *vals):
    for v in vals:
        if not math.isfinite(v):
            raise PhysicsFault(body_id, what)


def step_world(world, forces, dt, cfg=None, stability=False):
    """Advance one world a control step of dt under per-body wrenches.

    forces is a sequence of (fx, fy, torque) matching world.bodies order;
    integration happens over cfg physics.substeps equal substeps. The result
    is a pure function of the inputs.
    """
    cfg = cfg or Config()
    bodies = world.bodies
    if len(forces) != len(bodies):
        raise ValueError(f"forces length {len(forces)} != body count {len(bodies)}")
    for body, f in zip(bodies, forces):
        _check_finite(body.id, "force", *f)
        _check_finite(body.id, "state", *body.pose, *body.lin_vel,
                      body.yaw_rate, body.height)

    sim, order, seg_ids = _build_sim(world, cfg)
    wrench = np.zeros((1, sim.n_bodies, 3))
    for i, bi in enumerate(order):
        wrench[0, i] = forces[bi]
    sim.step_range(0, 1, 0, wrench=wrench, dt=dt, stability=stability)

    new_bodies = []
    idx_of = {bi: i for i, bi in enumerate(order)}
    for bi, body in enumerate(bodies):
        if bi in idx_of:
            i = idx_of[bi]
            new_bodies.append(replace(
                body,
                pose=(sim.pos[0, i, 0], sim.pos[0, i, 1], sim.yaw[0, i]),
                height=sim.z[0, i],
                lin_vel=(sim.vel[0, i, 0], sim.vel[0, i, 1]),
                yaw_rate=sim.omg[0, i]))
        else:
            new_bodies.append(body)
    new_joints = []
    for j in world.joints:
        if j.axis == "horizontal":
            new_joints.append(replace(j, angle=sim.hinge_ang[0],
                                      ang_vel=sim.hinge_omg[0]))
        else:
            i = idx_of[_joint_body_index(world, j)]
            new_joints.append(replace(j, angle=sim.yaw[0, i],
                                      ang_vel=sim.omg[0, i]))
    return replace(world, bodies=tuple(new_bodies), joints=tuple(new_joints),
                   time=world.time + dt, step_count=world.step_count + 1)


def _joint_body_index(world, joint):
    for i, b in enumerate(world.bodies):
        if b.id == joint.link_body:
            return i
    raise KeyError(f"joint link body {joint.link_body} not in world")


def _build_sim(world, cfg):
    """Pack a WorldState into a one-env Sim; returns (sim, body order, seg ids)."""
    from .terrain import compose_track, Flat

    arena = world.arena
    if arena is None:
        arena = compose_track([Flat((200.0, 200.0))], (-100.0, -100.0),
                              perimeter=False)
    order = []
    sim_bodies = []
    extra_segments = []
    seg_ids = []
    door_body = -1
    vertical_ids = {j.link_body for j in world.joints if j.axis == "vertical"}
    door_damp = next((j.damping for j in world.joints if j.axis == "vertical"), None)

    for bi, body in enumerate(world.bodies):
        if isinstance(body.shape, Segment):
            a, b = body.shape.a, body.shape.b
            extra_segments.append((a[0], a[1], b[0], b[1],
                                   body.shape.z_top, body.friction_mu))
            seg_ids.append(body.id)
            continue
        if isinstance(body.shape, Disc):
            shape = ("disc", body.shape.radius)
        else:
            shape = ("rect", body.shape.half_w, body.shape.half_h)
        pinned = body.id in vertical_ids
        cls = core.CLASS_PINNED if pinned else _CLASS_CODES[body.body_class]
        inert = body.inertia
        kwargs = {}
        if pinned:
            kwargs["pinned_inertia"] = inert if inert is not None else (
                _rect_inertia(body))
        sim_bodies.append(core.Body(
            name=f"b{body.id}", shape=shape,
            mass=body.mass if not pinned else math.inf,
            friction=body.friction_mu, body_class=cls,
            inertia=None if pinned else inert, **kwargs))
        if pinned:
            door_body = len(sim_bodies) - 1
        order.append(bi)

    if door_damp is not None:
        cfg = Config({**cfg.overrides(), "terrain.door_damping": float(door_damp)})
    sim = core.Sim(1, sim_bodies, arena, cfg, door_body=door_body,
                   extra_segments=extra_segments or None)
    sim.reset_env(0)
    for i, bi in enumerate(order):
        body = world.bodies[bi]
        sim.pos[0, i] = body.pose[:2]
        sim.yaw[0, i] = body.pose[2]
        sim.vel[0, i] = body.lin_vel
        sim.omg[0, i] = body.yaw_rate
        sim.z[0, i] = body.height
    for j in world.joints:
        if j.axis == "horizontal":
            sim.hinge_ang[0] = j.angle
            sim.hinge_omg[0] = j.ang_vel
    return sim, order, seg_ids


def _rect_inertia(body):
    w, h = 2.0 * body.shape.half_w, 2.0 * body.shape.half_h
    m = 20.0 if not math.isfinite(body.mass) else body.mass
    return m * (w * w + h * h) / 12.0


# --------------------------------------------------------------------------
# contact queries (independent of the kernel's solver path)
# --------------------------------------------------------------------------

def detect_contacts(world, z_tol=0.4):
    """Every overlapping solid pair, once, sorted by (min id, max id)."""
    out = []
    bodies = world.bodies
    for i in range(len(bodies)):
        for j in range(i + 1, len(bodies)):
            a, b = bodies[i], bodies[j]
            if a.is_static() and b.is_static():
                continue
            if isinstance(a.shape, Segment) and isinstance(b.shape, Segment):
                continue
            c = _pair_contact(a, b, z_tol)
            if c is not None:
                out.append(c)
    out.sort(key=lambda c: (min(c.body_a, c.body_b), max(c.body_a, c.body_b)))
    return out


def _pair_contact(a, b, z_tol):
    if isinstance(a.shape, Segment):
        c = _pair_contact(b, a, z_tol)
        return None if c is None else c
    if isinstance(b.shape, Segment):
        if a.height + 0.15 >= b.shape.z_top:
            return None
        return _body_segment(a, b)
    if abs(a.height - b.height) >= z_tol:
        return None
    if isinstance(a.shape, Disc) and isinstance(b.shape, Disc):
        return _disc_disc(a, b)
    if isinstance(a.shape, Disc) and isinstance(b.shape, Rect):
        return _disc_rect(a, b)
    if isinstance(a.shape, Rect) and isinstance(b.shape, Disc):
        c = _disc_rect(b, a)
        return None if c is None else _flip(c)
    return None  # rect-rect pairs do not occur in any roster


def _flip(c):
    return Contact(c.body_b, c.body_a, (-c.normal[0], -c.normal[1]),
                   c.depth, c.point)


def _disc_disc(a, b):
    ax, ay = a.pose[:2]
    bx, by = b.pose[:2]
    dx, dy = bx - ax, by - ay
    rsum = a.shape.radius + b.shape.radius
    d2 = dx * dx + dy * dy
    if d2 >= rsum * rsum:
        return None
    dist = math.sqrt(d2)
    if dist < 1e-12:
        n = (1.0, 0.0)
        dist = 0.0
    else:
        n = (dx / dist, dy / dist)
    depth = rsum - dist
    p = (ax + n[0] * (a.shape.radius - 0.5 * depth),
         ay + n[1] * (a.shape.radius - 0.5 * depth))
    return Contact(a.id, b.id, n, depth, p)


def _disc_rect(d, r):
    cs, sn = math.cos(r.pose[2]), math.sin(r.pose[2])
    dx, dy = d.pose[0] - r.pose[0], d.pose[1] - r.pose[1]
    lx, ly = cs * dx + sn * dy, -sn * dx + cs * dy
    qx = min(max(lx, -r.shape.half_w), r.shape.half_w)
    qy = min(max(ly, -r.shape.half_h), r.shape.half_h)
    ex, ey = lx - qx, ly - qy
    dist = math.sqrt(ex * ex + ey * ey)
    if dist > 1e-12:
        if dist >= d.shape.radius:
            return None
        depth = d.shape.radius - dist
        nl = (-ex / dist, -ey / dist)
    else:
        m1 = r.shape.half_w - abs(lx)
        m2 = r.shape.half_h - abs(ly)
        if m1 < m2:
            depth = m1 + d.shape.radius
            nl = (-1.0 if lx >= 0 else 1.0, 0.0)
        else:
            depth = m2 + d.shape.radius
            nl = (0.0, -1.0 if ly >= 0 else 1.0)
    n = (cs * nl[0] - sn * nl[1], sn * nl[0] + cs * nl[1])
    p = (r.pose[0] + cs * qx - sn * qy, r.pose[1] + sn * qx + cs * qy)
    return Contact(d.id, r.id, n, depth, p)


def _body_segment(body, segbody):
    (x1, y1), (x2, y2) = segbody.shape.a, segbody.shape.b
    if not isinstance(body.shape, Disc):
        return None  # rect-vs-segment surface queries are not needed by tests
    px, py = body.pose[:2]
    ux, uy = x2 - x1, y2 - y1
    ll = ux * ux + uy * uy
    if ll < 1e-18:
        return None
    t = ((px - x1) * ux + (py - y1) * uy) / ll
    t = min(max(t, 0.0), 1.0)
    qx, qy = x1 + t * ux, y1 + t * uy
    dx, dy = px - qx, py - qy
    dist = math.sqrt(dx * dx + dy * dy)
    if dist >= body.shape.radius:
        return None
    if dist < 1e-12:
        ln = math.sqrt(ll)
        n = (uy / ln, -ux / ln)
    else:
        n = (-dx / dist, -dy / dist)
    return Contact(body.id, segbody.id, n, body.shape.radius - dist, (qx, qy))


def seesaw_torque_balance(plank, loads, gravity=9.81):
    """Net hinge torque from point loads on the plank.

    loads: iterable of (mass, signed arm along the plank from the pivot,
    positive toward the platform end). Positive torque raises the platform
    end; a load beyond the pivot on the platform side pulls it down.
    """
    c = math.cos(plank.angle)
    total = 0.0
    for m, arm in loads:
        total += m * gravity * (-arm) * c
    return total
