"""Kernel backend selection and the batched simulation state container.

The physics kernel exists in two interchangeable backends built from one
source file: the compiled extension (fast) and the interpreted module
(portable fallback). Selection happens at import; QUADARENA_BACKEND=python
forces the fallback, QUADARENA_BACKEND=compiled refuses to run without the
extension. Both backends are bit-for-bit identical.
"""

import importlib.util
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

__all__ = ["BACKEND", "kernel", "Body", "Sim", "RING_STEPS",
           "CLASS_AGENT", "CLASS_NPC_ROBOT", "CLASS_SHEEP", "CLASS_OBJECT",
           "CLASS_PINNED"]

CLASS_AGENT = 0
CLASS_NPC_ROBOT = 1
CLASS_SHEEP = 2
CLASS_OBJECT = 3
CLASS_PINNED = 4

RING_STEPS = 10  # impulse window length in control steps (0.2 s at 50 Hz)


def _load_interpreted():
    path = os.path.join(os.path.dirname(__file__), "_kernel.py")
    spec = importlib.util.spec_from_file_location("quadarena._kernel_interp", path)
    mod = importlib.util.module_from_spec(spec)
    sys.modules["quadarena._kernel_interp"] = mod
    spec.loader.exec_module(mod)
    return mod


def _select_backend():
    choice = os.environ.get("QUADARENA_BACKEND", "auto").lower()
    if choice == "python":
        return _load_interpreted(), "python"
    from . import _kernel as mod
    compiled = mod.is_compiled()
    if choice == "compiled" and not compiled:
        raise ImportError(
            "QUADARENA_BACKEND=compiled but the extension is not built; "
            "run pip install -e . --no-build-isolation")
    return mod, ("compiled" if compiled else "python")


kernel, BACKEND = _select_backend()


@dataclass(frozen=True)
class Body:
    """Physical description of one simulated body (constant per task)."""
    name: str
    shape: tuple                 # ("disc", r) or ("rect", half_w, half_h)
    mass: float                  # math.inf for statics / pinned bodies
    friction: float
    body_class: int
    inertia: float = None        # derived from shape when omitted
    pinned_inertia: float = None # finite inertia for pinned rotors

    def derived_inertia(self):
        if self.pinned_inertia is not None:
            return self.pinned_inertia
        if self.inertia is not None:
            return self.inertia
        if not math.isfinite(self.mass):
            return math.inf
        if self.shape[0] == "disc":
            return 0.5 * self.mass * self.shape[1] ** 2
        w, h = 2.0 * self.shape[1], 2.0 * self.shape[2]
        return self.mass * (w * w + h * h) / 12.0


class Sim:
    """State and scratch arrays for n_envs independent copies of one roster.

    All mutable state is (n_envs, n_bodies, ...) float64; environments only
    ever touch their own rows, so stepping disjoint env ranges from several
    workers is race-free and bitwise order-independent.
    """

    def __init__(self, n_envs, bodies, arena, cfg, ctrl_map=(), sheep_map=(),
                 door_body=-1, n_workers=1, extra_segments=None):
        if n_envs <= 0:
            raise ValueError("n_envs must be positive")
        self.n_envs = n_envs
        self.bodies = list(bodies)
        self.arena = arena
        self.cfg = cfg
        B = len(self.bodies)
        self.n_bodies = B

        # per-body constants
        self.shape_code = np.zeros(B, dtype=np.int32)
        self.radius = np.zeros(B)
        self.half_w = np.zeros(B)
        self.half_h = np.zeros(B)
        self.mass = np.zeros(B)
        self.inv_mass = np.zeros(B)
        self.inertia = np.zeros(B)
        self.inv_inertia = np.zeros(B)
        self.friction = np.zeros(B)
        self.body_class = np.zeros(B, dtype=np.int32)
        for i, body in enumerate(self.bodies):
            if body.shape[0] == "disc":
                self.shape_code[i] = 0
                self.radius[i] = body.shape[1]
            else:
                self.shape_code[i] = 1
                self.half_w[i] = body.shape[1]
                self.half_h[i] = body.shape[2]
                self.radius[i] = math.hypot(body.shape[1], body.shape[2])
            inert = body.derived_inertia()
            if math.isfinite(body.mass):
                self.mass[i] = body.mass
                self.inv_mass[i] = 1.0 / body.mass
            if math.isfinite(inert) and inert > 0.0:
                self.inertia[i] = inert
                self.inv_inertia[i] = 1.0 / inert
            self.friction[i] = body.friction
            self.body_class[i] = body.body_class

        self.ctrl_map = np.asarray(list(ctrl_map), dtype=np.int32).reshape(-1)
        self.sheep_map = np.asarray(list(sheep_map), dtype=np.int32).reshape(-1)
        self.door_body = int(door_body)

        # mutable state
        E = n_envs
        self.pos = np.zeros((E, B, 2))
        self.yaw = np.zeros((E, B))
        self.vel = np.zeros((E, B, 2))
        self.omg = np.zeros((E, B))
        self.z = np.zeros((E, B))
        self.fallen = np.zeros((E, B), dtype=np.uint8)
        self.ring = np.zeros((E, B, RING_STEPS))
        self.ring_pos = np.zeros(E, dtype=np.int32)
        self.hinge_ang = np.zeros(E)
        self.hinge_omg = np.zeros(E)

        # scratch
        self.wrench_scratch = np.zeros((E, B, 3))
        self.imp_acc = np.zeros((E, B))
        self.zero_wrench = np.zeros((E, B, 3))
        seg = arena.seg_array()
        if extra_segments is not None and len(extra_segments):
            seg = np.ascontiguousarray(
                np.vstack([seg, np.asarray(extra_segments, dtype=np.float64)]))
        maxc = B * (B - 1) // 2 + B * max(1, seg.shape[0]) + 16
        self.n_workers = max(1, n_workers)
        self._c_pair = [np.zeros((maxc, 2), dtype=np.int32)
                        for _ in range(self.n_workers)]
        self._c_dat = [np.zeros((maxc, 14)) for _ in range(self.n_workers)]

        self._zero_cmd = np.zeros((E, max(1, len(self.ctrl_map)), 3))
        self._zero_acc = np.zeros((E, max(1, len(self.sheep_map)), 2))

        # cached scalars
        self.dt = cfg["physics.dt"]
        self.n_substeps = cfg["physics.substeps"]
        self._seg = seg
        self._hreg = arena.region_array()
        self._bounds = arena.bounds_array()
        self._ss = arena.seesaw_array()
        self._has_seesaw = 1 if arena.seesaw is not None else 0

    def reset_env(self, e):
        """Zero env e's dynamic state (poses are then set by the caller)."""
        self.pos[e] = 0.0
        self.yaw[e] = 0.0
        self.vel[e] = 0.0
        self.omg[e] = 0.0
        self.z[e] = 0.0
        self.fallen[e] = 0
        self.ring[e] = 0.0
        self.ring_pos[e] = 0
        ss = self.arena.seesaw
        self.hinge_ang[e] = ss.init_angle if ss is not None else 0.0
        self.hinge_omg[e] = 0.0

    def snap_supports(self, e):
        """Set every body's height to its support (used after spawning)."""
        from .terrain import height_at
        ang = self.hinge_ang[e]
        for b in range(self.n_bodies):
            self.z[e, b] = height_at(self.arena, self.pos[e, b, 0],
                                     self.pos[e, b, 1], seesaw_angle=ang)

    def step_range(self, e0, e1, worker, cmd=None, npc_acc=None,
                   wrench=None, dt=None, substeps=None, stability=True):
        """Advance envs [e0, e1) one control step. Thread-safe across
        disjoint ranges when each call uses its own worker slot."""
        cfg = self.cfg
        use_ctrl = 1 if cmd is not None else 0
        use_wrench = 1 if wrench is not None else 0
        cmd = cmd if cmd is not None else self._zero_cmd
        npc_acc = npc_acc if npc_acc is not None else self._zero_acc
        wrench = wrench if wrench is not None else self.zero_wrench
        dt = self.dt if dt is None else dt
        substeps = self.n_substeps if substeps is None else substeps
        ss = self._ss
        kernel.step_envs(
            self.pos, self.yaw, self.vel, self.omg, self.z, self.fallen,
            self.ring, self.ring_pos, self.hinge_ang, self.hinge_omg,
            cmd, npc_acc, wrench,
            self.shape_code, self.radius, self.half_w, self.half_h,
            self.mass, self.inv_mass, self.inertia, self.inv_inertia,
            self.friction, self.body_class, self.ctrl_map, self.sheep_map,
            self._seg, self._hreg,
            self._bounds[0], self._bounds[1], self._bounds[2], self._bounds[3],
            ss[0], ss[1], ss[2], ss[3], ss[4], ss[5], ss[6], ss[7], ss[8],
            self.wrench_scratch, self.imp_acc,
            self._c_pair[worker], self._c_dat[worker],
            dt / substeps, substeps,
            cfg["physics.gravity"], cfg["locomotion.tau"], cfg["locomotion.tau"],
            cfg["locomotion.f_max_scale"],
            cfg["physics.step_up"], cfg["physics.fall_drop"],
            cfg["locomotion.topple_impulse"], cfg["locomotion.topple_min_impulse"],
            cfg["physics.body_z_tol"],
            cfg["physics.slop"], cfg["physics.baumgarte"],
            cfg["sheep.v_max"], cfg["terrain.door_damping"],
            cfg["physics.solver_iters"], cfg["physics.position_iters"],
            e0, e1,
            use_ctrl, use_wrench, 1 if stability else 0,
            self._has_seesaw, self.door_body)
