# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Batched planar rigid-body kernel.

One source, two backends: this module is written in Cython pure-Python mode.
Compiled (setup.py) it becomes the fast extension; imported as plain Python
it is the fallback backend. Both produce bit-identical results: the math uses
only IEEE-exact primitives plus libm calls, and the extension is compiled
with FMA contraction disabled.

The kernel advances a contiguous range of environments [e0, e1) through one
control step: command-tracking wrenches, n_substeps of semi-implicit
integration with contact impulses (restitution 0, Coulomb friction), hinge
dynamics for the seesaw plank and the pinned revolving door, terrain-height
support tracking with step-up blocking and fall detection, and the sliding
impulse window used for topple detection. Environments are fully independent,
so any partition of [0, n_envs) over workers gives identical results.

State arrays are (n_envs, n_bodies, ...) float64, C-contiguous. Body shape
codes: 0 disc, 1 rectangle. Body class codes: 0 agent robot, 1 npc robot,
2 sheep, 3 free object, 4 pinned rotor (revolving door).
"""

import cython

if cython.compiled:
    from cython.cimports.libc.math import cos, fabs, sin, sqrt
else:
    from math import cos, fabs, sin, sqrt


def is_compiled():
    return cython.compiled


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _height(x: cython.double, y: cython.double,
            hreg: cython.double[:, ::1], n_hreg: cython.int,
            bx0: cython.double, by0: cython.double,
            bx1: cython.double, by1: cython.double,
            has_seesaw: cython.int,
            ss_px: cython.double, ss_py: cython.double,
            ss_pz: cython.double, ss_hl: cython.double,
            ss_hw: cython.double,
            sin_th: cython.double, cos_th: cython.double) -> cython.double:
    """Support height at (x, y); -1e9 outside the arena bounds."""
    r: cython.int
    h: cython.double
    along: cython.double
    dx: cython.double
    dy: cython.double
    if x < bx0 or x > bx1 or y < by0 or y > by1:
        return -1e9
    h = 0.0
    for r in range(n_hreg):
        if hreg[r, 0] == 0.0:
            if hreg[r, 1] <= x <= hreg[r, 3] and hreg[r, 2] <= y <= hreg[r, 4]:
                h = hreg[r, 5]
        else:
            dx = x - hreg[r, 1]
            dy = y - hreg[r, 2]
            if dx * dx + dy * dy <= hreg[r, 3] * hreg[r, 3]:
                h = hreg[r, 5]
    if has_seesaw == 1 and cos_th > 1e-9:
        if fabs(y - ss_py) <= ss_hw:
            along = (x - ss_px) / cos_th
            if -ss_hl <= along <= ss_hl:
                h = ss_pz + along * sin_th
    return h


def step_envs(
    # mutable state ------------------------------------------------------
    pos: cython.double[:, :, ::1],      # (E,B,2)
    yaw: cython.double[:, ::1],         # (E,B)
    vel: cython.double[:, :, ::1],      # (E,B,2)
    omg: cython.double[:, ::1],         # (E,B)
    z: cython.double[:, ::1],           # (E,B)
    fallen: cython.uchar[:, ::1],       # (E,B)
    ring: cython.double[:, :, ::1],     # (E,B,RING) sliding impulse window
    ring_pos: cython.int[::1],          # (E,)
    hinge_ang: cython.double[::1],      # (E,) seesaw angle
    hinge_omg: cython.double[::1],      # (E,)
    # per-step inputs ------------------------------------------------------
    cmd: cython.double[:, :, ::1],      # (E,NC,3) velocity commands
    npc_acc: cython.double[:, :, ::1],  # (E,NS,2) sheep accelerations
    wrench_ext: cython.double[:, :, ::1],  # (E,B,3)
    # body constants -------------------------------------------------------
    shape: cython.int[::1],
    radius: cython.double[::1],
    hw: cython.double[::1],
    hh: cython.double[::1],
    mass: cython.double[::1],
    inv_m: cython.double[::1],
    inertia: cython.double[::1],
    inv_i: cython.double[::1],
    mu: cython.double[::1],
    bclass: cython.int[::1],
    ctrl_map: cython.int[::1],
    sheep_map: cython.int[::1],
    # arena constants ------------------------------------------------------
    seg: cython.double[:, ::1],         # (S,6) x1,y1,x2,y2,z_top,mu
    hreg: cython.double[:, ::1],        # (R,6)
    bx0: cython.double, by0: cython.double,
    bx1: cython.double, by1: cython.double,
    # seesaw constants -----------------------------------------------------
    ss_px: cython.double, ss_py: cython.double, ss_pz: cython.double,
    ss_hl: cython.double, ss_hw: cython.double,
    ss_lo: cython.double, ss_hi: cython.double,
    ss_damp: cython.double, ss_inertia: cython.double,
    # scratch --------------------------------------------------------------
    wr: cython.double[:, :, ::1],       # (E,B,3) wrench accumulator
    imp_acc: cython.double[:, ::1],     # (E,B) per-step impact impulse
    c_pair: cython.int[:, ::1],         # (MAXC,2)
    c_dat: cython.double[:, ::1],       # (MAXC,14)
    # scalars ----------------------------------------------------------------
    dt_sub: cython.double, n_substeps: cython.int,
    gravity: cython.double, tau_v: cython.double, tau_w: cython.double,
    fmax_scale: cython.double,
    step_up: cython.double, fall_drop: cython.double,
    topple_j: cython.double, topple_jmin: cython.double,
    body_z_tol: cython.double,
    slop: cython.double, baumgarte: cython.double,
    sheep_vmax: cython.double, door_damp: cython.double,
    solver_iters: cython.int, pos_iters: cython.int,
    e0: cython.int, e1: cython.int,
    use_ctrl: cython.int, use_wrench: cython.int,
    do_stability: cython.int, has_seesaw: cython.int,
    door_body: cython.int,
):
    B: cython.int = pos.shape[1]
    NC: cython.int = ctrl_map.shape[0]
    NS: cython.int = sheep_map.shape[0]
    S: cython.int = seg.shape[0]
    R: cython.int = hreg.shape[0]
    RING: cython.int = ring.shape[2]
    MAXC: cython.int = c_pair.shape[0]

    e: cython.int
    b: cython.int
    i: cython.int
    j: cython.int
    k: cython.int
    sub: cython.int
    it: cython.int
    nc: cython.int
    rp: cython.int

    with cython.nogil:
        for e in range(e0, e1):
            _step_one(
                e, B, NC, NS, S, R, RING, MAXC,
                pos, yaw, vel, omg, z, fallen, ring, ring_pos,
                hinge_ang, hinge_omg, cmd, npc_acc, wrench_ext,
                shape, radius, hw, hh, mass, inv_m, inertia, inv_i, mu,
                bclass, ctrl_map, sheep_map, seg, hreg,
                bx0, by0, bx1, by1,
                ss_px, ss_py, ss_pz, ss_hl, ss_hw, ss_lo, ss_hi,
                ss_damp, ss_inertia,
                wr, imp_acc, c_pair, c_dat,
                dt_sub, n_substeps, gravity, tau_v, tau_w, fmax_scale,
                step_up, fall_drop, topple_j, topple_jmin, body_z_tol,
                slop, baumgarte, sheep_vmax, door_damp,
                solver_iters, pos_iters,
                use_ctrl, use_wrench, do_stability, has_seesaw, door_body)


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _step_one(
    e: cython.int, B: cython.int, NC: cython.int, NS: cython.int,
    S: cython.int, R: cython.int, RING: cython.int, MAXC: cython.int,
    pos: cython.double[:, :, ::1], yaw: cython.double[:, ::1],
    vel: cython.double[:, :, ::1], omg: cython.double[:, ::1],
    z: cython.double[:, ::1], fallen: cython.uchar[:, ::1],
    ring: cython.double[:, :, ::1], ring_pos: cython.int[::1],
    hinge_ang: cython.double[::1], hinge_omg: cython.double[::1],
    cmd: cython.double[:, :, ::1], npc_acc: cython.double[:, :, ::1],
    wrench_ext: cython.double[:, :, ::1],
    shape: cython.int[::1], radius: cython.double[::1],
    hw: cython.double[::1], hh: cython.double[::1],
    mass: cython.double[::1], inv_m: cython.double[::1],
    inertia: cython.double[::1], inv_i: cython.double[::1],
    mu: cython.double[::1], bclass: cython.int[::1],
    ctrl_map: cython.int[::1], sheep_map: cython.int[::1],
    seg: cython.double[:, ::1], hreg: cython.double[:, ::1],
    bx0: cython.double, by0: cython.double,
    bx1: cython.double, by1: cython.double,
    ss_px: cython.double, ss_py: cython.double, ss_pz: cython.double,
    ss_hl: cython.double, ss_hw: cython.double,
    ss_lo: cython.double, ss_hi: cython.double,
    ss_damp: cython.double, ss_inertia: cython.double,
    wr: cython.double[:, :, ::1], imp_acc: cython.double[:, ::1],
    c_pair: cython.int[:, ::1], c_dat: cython.double[:, ::1],
    dt_sub: cython.double, n_substeps: cython.int,
    gravity: cython.double, tau_v: cython.double, tau_w: cython.double,
    fmax_scale: cython.double,
    step_up: cython.double, fall_drop: cython.double,
    topple_j: cython.double, topple_jmin: cython.double,
    body_z_tol: cython.double,
    slop: cython.double, baumgarte: cython.double,
    sheep_vmax: cython.double, door_damp: cython.double,
    solver_iters: cython.int, pos_iters: cython.int,
    use_ctrl: cython.int, use_wrench: cython.int,
    do_stability: cython.int, has_seesaw: cython.int,
    door_body: cython.int,
) -> cython.int:
    b: cython.int
    i: cython.int
    sub: cython.int
    it: cython.int
    nc: cython.int
    rp: cython.int
    sin_th: cython.double
    cos_th: cython.double
    cx: cython.double
    cy: cython.double
    cw: cython.double
    cs: cython.double
    sn: cython.double
    cwx: cython.double
    cwy: cython.double
    kv: cython.double
    kw: cython.double
    fx: cython.double
    fy: cython.double
    tz: cython.double
    fmax: cython.double
    tmax: cython.double
    fm2: cython.double
    sc: cython.double
    ax: cython.double
    ay: cython.double
    nx: cython.double
    ny: cython.double
    sup: cython.double
    sup2: cython.double
    along: cython.double
    torque: cython.double
    itot: cython.double
    alpha: cython.double
    speed: cython.double
    dv: cython.double
    reff: cython.double
    dw: cython.double
    wsum: cython.double
    moved: cython.int

    # ---- control wrenches (held constant over the control step) ----------
    for b in range(B):
        wr[e, b, 0] = 0.0
        wr[e, b, 1] = 0.0
        wr[e, b, 2] = 0.0
        imp_acc[e, b] = 0.0
    if use_ctrl == 1:
        for i in range(NC):
            b = ctrl_map[i]
            if fallen[e, b] == 1:
                continue
            cx = cmd[e, i, 0]
            cy = cmd[e, i, 1]
            cw = cmd[e, i, 2]
            cs = cos(yaw[e, b])
            sn = sin(yaw[e, b])
            cwx = cs * cx - sn * cy
            cwy = sn * cx + cs * cy
            kv = mass[b] / tau_v
            # first-order tracking plus centripetal feed-forward for turns
            fx = kv * (cwx - vel[e, b, 0]) + mass[b] * cw * (-cwy)
            fy = kv * (cwy - vel[e, b, 1]) + mass[b] * cw * cwx
            fmax = fmax_scale * mass[b] * gravity * mu[b]
            fm2 = fx * fx + fy * fy
            if fm2 > fmax * fmax:
                sc = fmax / sqrt(fm2)
                fx = fx * sc
                fy = fy * sc
            kw = inertia[b] / tau_w
            tz = kw * (cw - omg[e, b])
            tmax = fmax * radius[b]
            if tz > tmax:
                tz = tmax
            elif tz < -tmax:
                tz = -tmax
            wr[e, b, 0] = fx
            wr[e, b, 1] = fy
            wr[e, b, 2] = tz
        for i in range(NS):
            b = sheep_map[i]
            wr[e, b, 0] = mass[b] * npc_acc[e, i, 0]
            wr[e, b, 1] = mass[b] * npc_acc[e, i, 1]
    if use_wrench == 1:
        for b in range(B):
            wr[e, b, 0] = wr[e, b, 0] + wrench_ext[e, b, 0]
            wr[e, b, 1] = wr[e, b, 1] + wrench_ext[e, b, 1]
            wr[e, b, 2] = wr[e, b, 2] + wrench_ext[e, b, 2]

    # ---- substeps ---------------------------------------------------------
    for sub in range(n_substeps):
        sin_th = sin(hinge_ang[e])
        cos_th = cos(hinge_ang[e])

        # velocity integration (semi-implicit: velocities first)
        for b in range(B):
            if inv_m[b] > 0.0:
                ax = wr[e, b, 0] * inv_m[b]
                ay = wr[e, b, 1] * inv_m[b]
                if has_seesaw == 1 and cos_th > 1e-9:
                    # passive bodies slide down the tilted plank; upright
                    # robots hold the slope through their legs
                    if bclass[b] >= 2 or fallen[e, b] == 1:
                        if fabs(pos[e, b, 1] - ss_py) <= ss_hw:
                            along = (pos[e, b, 0] - ss_px) / cos_th
                            if -ss_hl <= along <= ss_hl:
                                ax = ax - gravity * sin_th * cos_th
                vel[e, b, 0] = vel[e, b, 0] + ax * dt_sub
                vel[e, b, 1] = vel[e, b, 1] + ay * dt_sub
            if inv_i[b] > 0.0:
                omg[e, b] = omg[e, b] + wr[e, b, 2] * inv_i[b] * dt_sub

        # contact detection at current positions
        nc = _detect(e, B, S, MAXC, pos, yaw, z, shape, radius, hw, hh,
                     inv_m, inv_i, mu, bclass, seg, c_pair, c_dat,
                     step_up, body_z_tol)

        # velocity impulses: restitution 0, Coulomb friction
        for it in range(solver_iters):
            for i in range(nc):
                _solve_contact(e, i, pos, vel, omg, inv_m, inv_i,
                               c_pair, c_dat)

        # impact impulses feed the topple window (sustained leaning stays out)
        for i in range(nc):
            if c_dat[i, 6] >= topple_jmin:
                b = c_pair[i, 0]
                if bclass[b] <= 1:
                    imp_acc[e, b] = imp_acc[e, b] + c_dat[i, 6]
                b = c_pair[i, 1]
                if b >= 0 and bclass[b] <= 1:
                    imp_acc[e, b] = imp_acc[e, b] + c_dat[i, 6]

        # ground friction before positions move, so a sub-threshold push
        # cannot creep a resting object across the floor
        for b in range(B):
            if inv_m[b] <= 0.0:
                continue
            if bclass[b] == 3 or (bclass[b] <= 1 and fallen[e, b] == 1):
                dv = mu[b] * gravity * dt_sub
                speed = sqrt(vel[e, b, 0] * vel[e, b, 0]
                             + vel[e, b, 1] * vel[e, b, 1])
                if speed <= dv:
                    vel[e, b, 0] = 0.0
                    vel[e, b, 1] = 0.0
                else:
                    sc = 1.0 - dv / speed
                    vel[e, b, 0] = vel[e, b, 0] * sc
                    vel[e, b, 1] = vel[e, b, 1] * sc
                if shape[b] == 0:
                    reff = radius[b]
                else:
                    reff = 0.5 * (hw[b] + hh[b])
                if reff > 1e-9:
                    dw = 1.3333333333333333 * mu[b] * gravity / reff * dt_sub
                    if fabs(omg[e, b]) <= dw:
                        omg[e, b] = 0.0
                    elif omg[e, b] > 0.0:
                        omg[e, b] = omg[e, b] - dw
                    else:
                        omg[e, b] = omg[e, b] + dw
            elif bclass[b] == 2:
                speed = sqrt(vel[e, b, 0] * vel[e, b, 0]
                             + vel[e, b, 1] * vel[e, b, 1])
                if speed > sheep_vmax:
                    sc = sheep_vmax / speed
                    vel[e, b, 0] = vel[e, b, 0] * sc
                    vel[e, b, 1] = vel[e, b, 1] * sc

        # position integration with step-up blocking (axis-separated slide)
        for b in range(B):
            if inv_m[b] > 0.0:
                nx = pos[e, b, 0] + vel[e, b, 0] * dt_sub
                ny = pos[e, b, 1] + vel[e, b, 1] * dt_sub
                sup = _height(nx, ny, hreg, R, bx0, by0, bx1, by1,
                              has_seesaw, ss_px, ss_py, ss_pz, ss_hl, ss_hw,
                              sin_th, cos_th)
                if sup <= z[e, b] + step_up:
                    pos[e, b, 0] = nx
                    pos[e, b, 1] = ny
                else:
                    sup2 = _height(nx, pos[e, b, 1], hreg, R, bx0, by0,
                                   bx1, by1, has_seesaw, ss_px, ss_py, ss_pz,
                                   ss_hl, ss_hw, sin_th, cos_th)
                    if sup2 <= z[e, b] + step_up:
                        pos[e, b, 0] = nx
                        vel[e, b, 1] = 0.0
                    else:
                        sup2 = _height(pos[e, b, 0], ny, hreg, R, bx0, by0,
                                       bx1, by1, has_seesaw, ss_px, ss_py,
                                       ss_pz, ss_hl, ss_hw, sin_th, cos_th)
                        if sup2 <= z[e, b] + step_up:
                            pos[e, b, 1] = ny
                            vel[e, b, 0] = 0.0
                        else:
                            vel[e, b, 0] = 0.0
                            vel[e, b, 1] = 0.0
            if inv_i[b] > 0.0:
                yaw[e, b] = yaw[e, b] + omg[e, b] * dt_sub

        # positional projection keeps residual penetration below the slop
        for it in range(pos_iters):
            nc = _detect(e, B, S, MAXC, pos, yaw, z, shape, radius, hw, hh,
                         inv_m, inv_i, mu, bclass, seg, c_pair, c_dat,
                         step_up, body_z_tol)
            moved = 0
            for i in range(nc):
                if c_dat[i, 4] > slop:
                    _project_contact(e, i, pos, inv_m, c_pair, c_dat,
                                     slop, baumgarte, bclass, mu, fallen,
                                     gravity, dt_sub)
                    moved = 1
            if moved == 0:
                break

        # seesaw hinge: loads torque, damping, hard limits
        if has_seesaw == 1:
            torque = 0.0
            itot = ss_inertia
            if cos_th > 1e-9:
                for b in range(B):
                    if inv_m[b] > 0.0 and fabs(pos[e, b, 1] - ss_py) <= ss_hw:
                        along = (pos[e, b, 0] - ss_px) / cos_th
                        if -ss_hl <= along <= ss_hl:
                            torque = torque + mass[b] * gravity * (-along) * cos_th
                            itot = itot + mass[b] * along * along
            torque = torque - ss_damp * hinge_omg[e]
            alpha = torque / itot
            hinge_omg[e] = hinge_omg[e] + alpha * dt_sub
            hinge_ang[e] = hinge_ang[e] + hinge_omg[e] * dt_sub
            if hinge_ang[e] < ss_lo:
                hinge_ang[e] = ss_lo
                if hinge_omg[e] < 0.0:
                    hinge_omg[e] = 0.0
            elif hinge_ang[e] > ss_hi:
                hinge_ang[e] = ss_hi
                if hinge_omg[e] > 0.0:
                    hinge_omg[e] = 0.0
            sin_th = sin(hinge_ang[e])
            cos_th = cos(hinge_ang[e])

        # pinned rotor damping
        if door_body >= 0:
            sc = 1.0 - door_damp * dt_sub
            if sc < 0.0:
                sc = 0.0
            omg[e, door_body] = omg[e, door_body] * sc

        # support tracking and fall detection
        for b in range(B):
            if inv_m[b] <= 0.0 and b != door_body:
                continue
            sup = _height(pos[e, b, 0], pos[e, b, 1], hreg, R,
                          bx0, by0, bx1, by1, has_seesaw,
                          ss_px, ss_py, ss_pz, ss_hl, ss_hw, sin_th, cos_th)
            if sup < z[e, b] - fall_drop:
                if bclass[b] <= 1 and do_stability == 1:
                    fallen[e, b] = 1
            z[e, b] = sup

    # ---- sliding impulse window / topple ---------------------------------
    if do_stability == 1:
        rp = ring_pos[e]
        for b in range(B):
            if bclass[b] <= 1:
                ring[e, b, rp] = imp_acc[e, b]
                if fallen[e, b] == 0:
                    wsum = 0.0
                    for i in range(RING):
                        wsum = wsum + ring[e, b, i]
                    if wsum > topple_j:
                        fallen[e, b] = 1
        ring_pos[e] = (rp + 1) % RING
    return 0


# --------------------------------------------------------------------------
# contact generation
# --------------------------------------------------------------------------

@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _emit(nc: cython.int, MAXC: cython.int,
          c_pair: cython.int[:, ::1], c_dat: cython.double[:, ::1],
          a: cython.int, b: cython.int,
          nx: cython.double, ny: cython.double,
          px: cython.double, py: cython.double,
          depth: cython.double, mu_c: cython.double) -> cython.int:
    if nc >= MAXC:
        return nc
    c_pair[nc, 0] = a
    c_pair[nc, 1] = b
    c_dat[nc, 0] = nx
    c_dat[nc, 1] = ny
    c_dat[nc, 2] = px
    c_dat[nc, 3] = py
    c_dat[nc, 4] = depth
    c_dat[nc, 5] = mu_c
    c_dat[nc, 6] = 0.0
    c_dat[nc, 7] = 0.0
    return nc + 1


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _detect(e: cython.int, B: cython.int, S: cython.int, MAXC: cython.int,
            pos: cython.double[:, :, ::1], yaw: cython.double[:, ::1],
            z: cython.double[:, ::1],
            shape: cython.int[::1], radius: cython.double[::1],
            hw: cython.double[::1], hh: cython.double[::1],
            inv_m: cython.double[::1], inv_i: cython.double[::1],
            mu: cython.double[::1], bclass: cython.int[::1],
            seg: cython.double[:, ::1],
            c_pair: cython.int[:, ::1], c_dat: cython.double[:, ::1],
            step_up: cython.double, body_z_tol: cython.double) -> cython.int:
    """Build the contact list for env e, deterministically ordered."""
    nc: cython.int = 0
    a: cython.int
    b: cython.int
    s: cython.int
    i: cython.int
    mu_c: cython.double

    for a in range(B):
        for b in range(a + 1, B):
            if (inv_m[a] == 0.0 and inv_i[a] == 0.0
                    and inv_m[b] == 0.0 and inv_i[b] == 0.0):
                continue
            if fabs(z[e, a] - z[e, b]) >= body_z_tol:
                continue
            mu_c = sqrt(mu[a] * mu[b])
            if shape[a] == 0 and shape[b] == 0:
                nc = _col_disc_disc(e, a, b, pos, radius, mu_c,
                                    nc, MAXC, c_pair, c_dat)
            elif shape[a] == 0 and shape[b] == 1:
                nc = _col_disc_rect(e, a, b, 0, pos, yaw, radius, hw, hh,
                                    mu_c, nc, MAXC, c_pair, c_dat)
            elif shape[a] == 1 and shape[b] == 0:
                nc = _col_disc_rect(e, b, a, 1, pos, yaw, radius, hw, hh,
                                    mu_c, nc, MAXC, c_pair, c_dat)
            # rect-rect pairs do not occur in any task roster
        for s in range(S):
            if z[e, a] + step_up >= seg[s, 4]:
                continue
            if inv_m[a] == 0.0 and inv_i[a] == 0.0:
                continue
            mu_c = sqrt(mu[a] * seg[s, 5])
            if shape[a] == 0:
                nc = _col_disc_seg(e, a, s, pos, radius, seg, mu_c,
                                   nc, MAXC, c_pair, c_dat)
            else:
                nc = _col_rect_seg(e, a, s, pos, yaw, hw, hh, seg, mu_c,
                                   nc, MAXC, c_pair, c_dat)
    # effective masses, fixed for the substep
    for i in range(nc):
        _prep_contact(e, i, pos, inv_m, inv_i, c_pair, c_dat)
    return nc


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _col_disc_disc(e: cython.int, a: cython.int, b: cython.int,
                   pos: cython.double[:, :, ::1], radius: cython.double[::1],
                   mu_c: cython.double, nc: cython.int, MAXC: cython.int,
                   c_pair: cython.int[:, ::1],
                   c_dat: cython.double[:, ::1]) -> cython.int:
    dx: cython.double = pos[e, b, 0] - pos[e, a, 0]
    dy: cython.double = pos[e, b, 1] - pos[e, a, 1]
    rsum: cython.double = radius[a] + radius[b]
    d2: cython.double = dx * dx + dy * dy
    dist: cython.double
    nx: cython.double
    ny: cython.double
    if d2 >= rsum * rsum:
        return nc
    dist = sqrt(d2)
    if dist < 1e-12:
        nx = 1.0
        ny = 0.0
        dist = 0.0
    else:
        nx = dx / dist
        ny = dy / dist
    return _emit(nc, MAXC, c_pair, c_dat, a, b, nx, ny,
                 pos[e, a, 0] + nx * (radius[a] - 0.5 * (rsum - dist)),
                 pos[e, a, 1] + ny * (radius[a] - 0.5 * (rsum - dist)),
                 rsum - dist, mu_c)


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _col_disc_rect(e: cython.int, d: cython.int, r: cython.int,
                   swapped: cython.int,
                   pos: cython.double[:, :, ::1], yaw: cython.double[:, ::1],
                   radius: cython.double[::1],
                   hw: cython.double[::1], hh: cython.double[::1],
                   mu_c: cython.double, nc: cython.int, MAXC: cython.int,
                   c_pair: cython.int[:, ::1],
                   c_dat: cython.double[:, ::1]) -> cython.int:
    """Disc d against rectangle r; pair emitted as (min, max) index order."""
    cs: cython.double = cos(yaw[e, r])
    sn: cython.double = sin(yaw[e, r])
    dx: cython.double = pos[e, d, 0] - pos[e, r, 0]
    dy: cython.double = pos[e, d, 1] - pos[e, r, 1]
    lx: cython.double = cs * dx + sn * dy
    ly: cython.double = -sn * dx + cs * dy
    qx: cython.double = lx
    qy: cython.double = ly
    nxl: cython.double
    nyl: cython.double
    depth: cython.double
    dist: cython.double
    ex: cython.double
    ey: cython.double
    nx: cython.double
    ny: cython.double
    px: cython.double
    py: cython.double
    m1: cython.double
    m2: cython.double
    if qx > hw[r]:
        qx = hw[r]
    elif qx < -hw[r]:
        qx = -hw[r]
    if qy > hh[r]:
        qy = hh[r]
    elif qy < -hh[r]:
        qy = -hh[r]
    ex = lx - qx
    ey = ly - qy
    dist = sqrt(ex * ex + ey * ey)
    if dist > 1e-12:
        if dist >= radius[d]:
            return nc
        depth = radius[d] - dist
        nxl = -ex / dist
        nyl = -ey / dist
    else:
        # disc center inside the rectangle: push out along the shallow axis;
        # the a->b normal points from the disc toward the rect interior
        m1 = hw[r] - fabs(lx)
        m2 = hh[r] - fabs(ly)
        if m1 < m2:
            depth = m1 + radius[d]
            if lx >= 0.0:
                nxl = -1.0
            else:
                nxl = 1.0
            nyl = 0.0
        else:
            depth = m2 + radius[d]
            nxl = 0.0
            if ly >= 0.0:
                nyl = -1.0
            else:
                nyl = 1.0
    # local normal points disc -> rect; rotate to world
    nx = cs * nxl - sn * nyl
    ny = sn * nxl + cs * nyl
    px = pos[e, r, 0] + cs * qx - sn * qy
    py = pos[e, r, 1] + sn * qx + cs * qy
    if swapped == 0:
        return _emit(nc, MAXC, c_pair, c_dat, d, r, nx, ny, px, py, depth, mu_c)
    return _emit(nc, MAXC, c_pair, c_dat, r, d, -nx, -ny, px, py, depth, mu_c)


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _col_disc_seg(e: cython.int, a: cython.int, s: cython.int,
                  pos: cython.double[:, :, ::1], radius: cython.double[::1],
                  seg: cython.double[:, ::1], mu_c: cython.double,
                  nc: cython.int, MAXC: cython.int,
                  c_pair: cython.int[:, ::1],
                  c_dat: cython.double[:, ::1]) -> cython.int:
    ux: cython.double = seg[s, 2] - seg[s, 0]
    uy: cython.double = seg[s, 3] - seg[s, 1]
    ll: cython.double = ux * ux + uy * uy
    t: cython.double
    qx: cython.double
    qy: cython.double
    dx: cython.double
    dy: cython.double
    dist: cython.double
    if ll < 1e-18:
        return nc
    t = ((pos[e, a, 0] - seg[s, 0]) * ux + (pos[e, a, 1] - seg[s, 1]) * uy) / ll
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    qx = seg[s, 0] + t * ux
    qy = seg[s, 1] + t * uy
    dx = pos[e, a, 0] - qx
    dy = pos[e, a, 1] - qy
    dist = sqrt(dx * dx + dy * dy)
    if dist >= radius[a]:
        return nc
    if dist < 1e-12:
        # center exactly on the wall: push along the segment normal
        dx = -uy / sqrt(ll)
        dy = ux / sqrt(ll)
        dist = 0.0
    else:
        dx = dx / dist
        dy = dy / dist
    return _emit(nc, MAXC, c_pair, c_dat, a, -(s + 1), -dx, -dy, qx, qy,
                 radius[a] - dist, mu_c)


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _col_rect_seg(e: cython.int, a: cython.int, s: cython.int,
                  pos: cython.double[:, :, ::1], yaw: cython.double[:, ::1],
                  hw: cython.double[::1], hh: cython.double[::1],
                  seg: cython.double[:, ::1], mu_c: cython.double,
                  nc: cython.int, MAXC: cython.int,
                  c_pair: cython.int[:, ::1],
                  c_dat: cython.double[:, ::1]) -> cython.int:
    """Rectangle corners against the wall line, plus wall endpoints inside."""
    ux: cython.double = seg[s, 2] - seg[s, 0]
    uy: cython.double = seg[s, 3] - seg[s, 1]
    ll: cython.double = sqrt(ux * ux + uy * uy)
    n0x: cython.double
    n0y: cython.double
    side: cython.double
    cs: cython.double
    sn: cython.double
    k: cython.int
    cxl: cython.double
    cyl: cython.double
    qx: cython.double
    qy: cython.double
    d: cython.double
    t: cython.double
    lx: cython.double
    ly: cython.double
    m1: cython.double
    m2: cython.double
    nxl: cython.double
    nyl: cython.double
    ex: cython.double
    ey: cython.double
    if ll < 1e-9:
        return nc
    ux = ux / ll
    uy = uy / ll
    n0x = -uy
    n0y = ux
    side = n0x * (pos[e, a, 0] - seg[s, 0]) + n0y * (pos[e, a, 1] - seg[s, 1])
    if side == 0.0:
        return nc
    if side < 0.0:
        n0x = -n0x
        n0y = -n0y
    # n0 now points from the wall toward the rect center
    cs = cos(yaw[e, a])
    sn = sin(yaw[e, a])
    for k in range(4):
        if k == 0:
            cxl = hw[a]
            cyl = hh[a]
        elif k == 1:
            cxl = -hw[a]
            cyl = hh[a]
        elif k == 2:
            cxl = -hw[a]
            cyl = -hh[a]
        else:
            cxl = hw[a]
            cyl = -hh[a]
        qx = pos[e, a, 0] + cs * cxl - sn * cyl
        qy = pos[e, a, 1] + sn * cxl + cs * cyl
        d = n0x * (qx - seg[s, 0]) + n0y * (qy - seg[s, 1])
        if d < 0.0:
            t = ux * (qx - seg[s, 0]) + uy * (qy - seg[s, 1])
            if 0.0 <= t <= ll:
                nc = _emit(nc, MAXC, c_pair, c_dat, a, -(s + 1),
                           -n0x, -n0y, qx, qy, -d, mu_c)
    for k in range(2):
        qx = seg[s, k * 2]
        qy = seg[s, k * 2 + 1]
        ex = qx - pos[e, a, 0]
        ey = qy - pos[e, a, 1]
        lx = cs * ex + sn * ey
        ly = -sn * ex + cs * ey
        if fabs(lx) < hw[a] and fabs(ly) < hh[a]:
            m1 = hw[a] - fabs(lx)
            m2 = hh[a] - fabs(ly)
            if m1 < m2:
                d = m1
                if lx >= 0.0:
                    nxl = 1.0
                else:
                    nxl = -1.0
                nyl = 0.0
            else:
                d = m2
                nxl = 0.0
                if ly >= 0.0:
                    nyl = 1.0
                else:
                    nyl = -1.0
            nc = _emit(nc, MAXC, c_pair, c_dat, a, -(s + 1),
                       cs * nxl - sn * nyl, sn * nxl + cs * nyl,
                       qx, qy, d, mu_c)
    return nc


# --------------------------------------------------------------------------
# impulse solve
# --------------------------------------------------------------------------

@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _prep_contact(e: cython.int, i: cython.int,
                  pos: cython.double[:, :, ::1],
                  inv_m: cython.double[::1], inv_i: cython.double[::1],
                  c_pair: cython.int[:, ::1],
                  c_dat: cython.double[:, ::1]) -> cython.int:
    a: cython.int = c_pair[i, 0]
    b: cython.int = c_pair[i, 1]
    nx: cython.double = c_dat[i, 0]
    ny: cython.double = c_dat[i, 1]
    rax: cython.double = c_dat[i, 2] - pos[e, a, 0]
    ray: cython.double = c_dat[i, 3] - pos[e, a, 1]
    rbx: cython.double = 0.0
    rby: cython.double = 0.0
    ima: cython.double = inv_m[a]
    iia: cython.double = inv_i[a]
    imb: cython.double = 0.0
    iib: cython.double = 0.0
    ran: cython.double
    rbn: cython.double
    rat: cython.double
    rbt: cython.double
    kn: cython.double
    kt: cython.double
    if b >= 0:
        rbx = c_dat[i, 2] - pos[e, b, 0]
        rby = c_dat[i, 3] - pos[e, b, 1]
        imb = inv_m[b]
        iib = inv_i[b]
    ran = rax * ny - ray * nx
    rbn = rbx * ny - rby * nx
    rat = rax * nx + ray * ny
    rbt = rbx * nx + rby * ny
    kn = ima + imb + iia * ran * ran + iib * rbn * rbn
    kt = ima + imb + iia * rat * rat + iib * rbt * rbt
    c_dat[i, 8] = rax
    c_dat[i, 9] = ray
    c_dat[i, 10] = rbx
    c_dat[i, 11] = rby
    c_dat[i, 12] = kn
    c_dat[i, 13] = kt
    return 0


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _solve_contact(e: cython.int, i: cython.int,
                   pos: cython.double[:, :, ::1],
                   vel: cython.double[:, :, ::1], omg: cython.double[:, ::1],
                   inv_m: cython.double[::1], inv_i: cython.double[::1],
                   c_pair: cython.int[:, ::1],
                   c_dat: cython.double[:, ::1]) -> cython.int:
    a: cython.int = c_pair[i, 0]
    b: cython.int = c_pair[i, 1]
    nx: cython.double = c_dat[i, 0]
    ny: cython.double = c_dat[i, 1]
    rax: cython.double = c_dat[i, 8]
    ray: cython.double = c_dat[i, 9]
    rbx: cython.double = c_dat[i, 10]
    rby: cython.double = c_dat[i, 11]
    kn: cython.double = c_dat[i, 12]
    kt: cython.double = c_dat[i, 13]
    vax: cython.double = vel[e, a, 0] - omg[e, a] * ray
    vay: cython.double = vel[e, a, 1] + omg[e, a] * rax
    vbx: cython.double = 0.0
    vby: cython.double = 0.0
    tx: cython.double = -ny
    ty: cython.double = nx
    vn: cython.double
    vt: cython.double
    lam: cython.double
    newj: cython.double
    dj: cython.double
    maxf: cython.double
    if b >= 0:
        vbx = vel[e, b, 0] - omg[e, b] * rby
        vby = vel[e, b, 1] + omg[e, b] * rbx
    if kn > 1e-12:
        vn = (vbx - vax) * nx + (vby - vay) * ny
        lam = -vn / kn
        newj = c_dat[i, 6] + lam
        if newj < 0.0:
            newj = 0.0
        dj = newj - c_dat[i, 6]
        c_dat[i, 6] = newj
        if dj != 0.0:
            vel[e, a, 0] = vel[e, a, 0] - dj * nx * inv_m[a]
            vel[e, a, 1] = vel[e, a, 1] - dj * ny * inv_m[a]
            omg[e, a] = omg[e, a] - dj * inv_i[a] * (rax * ny - ray * nx)
            if b >= 0:
                vel[e, b, 0] = vel[e, b, 0] + dj * nx * inv_m[b]
                vel[e, b, 1] = vel[e, b, 1] + dj * ny * inv_m[b]
                omg[e, b] = omg[e, b] + dj * inv_i[b] * (rbx * ny - rby * nx)
            vax = vel[e, a, 0] - omg[e, a] * ray
            vay = vel[e, a, 1] + omg[e, a] * rax
            if b >= 0:
                vbx = vel[e, b, 0] - omg[e, b] * rby
                vby = vel[e, b, 1] + omg[e, b] * rbx
    if kt > 1e-12:
        vt = (vbx - vax) * tx + (vby - vay) * ty
        lam = -vt / kt
        maxf = c_dat[i, 5] * c_dat[i, 6]
        newj = c_dat[i, 7] + lam
        if newj > maxf:
            newj = maxf
        elif newj < -maxf:
            newj = -maxf
        dj = newj - c_dat[i, 7]
        c_dat[i, 7] = newj
        if dj != 0.0:
            vel[e, a, 0] = vel[e, a, 0] - dj * tx * inv_m[a]
            vel[e, a, 1] = vel[e, a, 1] - dj * ty * inv_m[a]
            omg[e, a] = omg[e, a] - dj * inv_i[a] * (rax * ty - ray * tx)
            if b >= 0:
                vel[e, b, 0] = vel[e, b, 0] + dj * tx * inv_m[b]
                vel[e, b, 1] = vel[e, b, 1] + dj * ty * inv_m[b]
                omg[e, b] = omg[e, b] + dj * inv_i[b] * (rbx * ty - rby * tx)
    return 0


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _friction_budget(b: cython.int, bclass: cython.int[::1],
                     mu: cython.double[::1], fallen: cython.uchar[:, ::1],
                     e: cython.int, gravity: cython.double,
                     dt_sub: cython.double) -> cython.double:
    """Positional correction a ground-resting body absorbs via static
    friction each pass; keeps sub-threshold pushes from creeping it."""
    if bclass[b] == 3 or (bclass[b] <= 1 and fallen[e, b] == 1):
        return 0.5 * mu[b] * gravity * dt_sub * dt_sub
    return 0.0


@cython.cfunc
@cython.nogil
@cython.exceptval(check=False)
def _project_contact(e: cython.int, i: cython.int,
                     pos: cython.double[:, :, ::1],
                     inv_m: cython.double[::1],
                     c_pair: cython.int[:, ::1],
                     c_dat: cython.double[:, ::1],
                     slop: cython.double,
                     baumgarte: cython.double,
                     bclass: cython.int[::1], mu: cython.double[::1],
                     fallen: cython.uchar[:, ::1],
                     gravity: cython.double,
                     dt_sub: cython.double) -> cython.int:
    a: cython.int = c_pair[i, 0]
    b: cython.int = c_pair[i, 1]
    w: cython.double = inv_m[a]
    corr: cython.double
    mag: cython.double
    budget: cython.double
    if b >= 0:
        w = w + inv_m[b]
    if w <= 0.0:
        return 0
    corr = baumgarte * (c_dat[i, 4] - slop) / w
    mag = corr * inv_m[a]
    budget = _friction_budget(a, bclass, mu, fallen, e, gravity, dt_sub)
    if mag > budget:
        mag = mag - budget
        pos[e, a, 0] = pos[e, a, 0] - c_dat[i, 0] * mag
        pos[e, a, 1] = pos[e, a, 1] - c_dat[i, 1] * mag
    if b >= 0:
        mag = corr * inv_m[b]
        budget = _friction_budget(b, bclass, mu, fallen, e, gravity, dt_sub)
        if mag > budget:
            mag = mag - budget
            pos[e, b, 0] = pos[e, b, 0] + c_dat[i, 0] * mag
            pos[e, b, 1] = pos[e, b, 1] + c_dat[i, 1] * mag
    return 0
