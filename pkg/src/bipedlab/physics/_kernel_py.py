"""Pure-numpy physics kernel (fallback when the compiled extension is absent).

Vectorized over environments. The articulated dynamics use generalized
coordinates q = [x, z, pitch, 6 joint angles]; link CoM Jacobians are
assembled from the planar chain geometry and the mass matrix is solved
per environment with a batched linear solve. Semantics match the
compiled kernel; results agree to floating-point solver differences.
"""

from __future__ import annotations

import numpy as np

from bipedlab.physics.layout import (
    INTEGRATOR_FAST,
    MODE_PD,
    NQ,
    P_CSH,
    P_CT,
    P_CTH,
    P_DN,
    P_DROP,
    P_DTAN,
    P_FCX,
    P_FCZ,
    P_GRAV,
    P_HEELX,
    P_HI,
    P_IFT,
    P_ISH,
    P_IT,
    P_ITH,
    P_KD,
    P_KN,
    P_KP,
    P_LO,
    P_LSH,
    P_LTH,
    P_MFT,
    P_MSH,
    P_MT,
    P_MTH,
    P_TAUMAX,
    P_TOEX,
    RK4_SUBSTEPS,
    TICK_DT,
)

COMPILED = False

# Absolute link angles: torso, L thigh/shank/foot, R thigh/shank/foot.
# Each row lists the q coordinates contributing to that angle.
_ANGLE_COORDS = (
    (2,),
    (2, 3), (2, 3, 4), (2, 3, 4, 5),
    (2, 6), (2, 6, 7), (2, 6, 7, 8),
)

# Per-link CoM as a sum of rotating offsets: (coef param, angle index, kind).
# kind 'd' = link "down" direction (sin, -cos); 't' = tangent (cos, sin);
# 'u' = torso "up" direction (-sin, cos).
_LINK_TERMS = (
    ((P_CT, 0, "u"),),
    ((P_CTH, 1, "d"),),
    ((P_LTH, 1, "d"), (P_CSH, 2, "d")),
    ((P_LTH, 1, "d"), (P_LSH, 2, "d"), (P_FCX, 3, "t"), (P_FCZ, 3, "d")),
    ((P_CTH, 4, "d"),),
    ((P_LTH, 4, "d"), (P_CSH, 5, "d")),
    ((P_LTH, 4, "d"), (P_LSH, 5, "d"), (P_FCX, 6, "t"), (P_FCZ, 6, "d")),
)
_LINK_MASS = (P_MT, P_MTH, P_MSH, P_MFT, P_MTH, P_MSH, P_MFT)
_LINK_INERTIA = (P_IT, P_ITH, P_ISH, P_IFT, P_ITH, P_ISH, P_IFT)

# Contact points: heel/toe per foot, expressed like link terms.
_POINT_TERMS = (
    ((P_LTH, 1, "d"), (P_LSH, 2, "d"), (P_HEELX, 3, "t"), (P_DROP, 3, "d")),
    ((P_LTH, 1, "d"), (P_LSH, 2, "d"), (P_TOEX, 3, "t"), (P_DROP, 3, "d")),
    ((P_LTH, 4, "d"), (P_LSH, 5, "d"), (P_HEELX, 6, "t"), (P_DROP, 6, "d")),
    ((P_LTH, 4, "d"), (P_LSH, 5, "d"), (P_TOEX, 6, "t"), (P_DROP, 6, "d")),
)
_POINT_FOOT = (0, 0, 1, 1)


def _angles(q, qd):
    """Absolute angles and angular rates of the 7 links, shape (B, 7)."""
    B = q.shape[0]
    phi = np.empty((B, 7))
    omg = np.empty((B, 7))
    for k, coords in enumerate(_ANGLE_COORDS):
        phi[:, k] = q[:, list(coords)].sum(axis=1)
        omg[:, k] = qd[:, list(coords)].sum(axis=1)
    return phi, omg


def _term_vectors(params, sin_phi, cos_phi, terms):
    """Rotating offset vectors, their angle derivatives, and angle indices."""
    vecs, dvecs, angles, coefs = [], [], [], []
    for coef_idx, k, kind in terms:
        a = params[coef_idx]
        s, c = sin_phi[:, k], cos_phi[:, k]
        if kind == "d":
            v = np.stack([s, -c], axis=-1)
            dv = np.stack([c, s], axis=-1)
        elif kind == "t":
            v = np.stack([c, s], axis=-1)
            dv = np.stack([-s, c], axis=-1)
        else:  # 'u'
            v = np.stack([-s, c], axis=-1)
            dv = np.stack([-c, -s], axis=-1)
        vecs.append(a * v)
        dvecs.append(a * dv)
        angles.append(k)
        coefs.append(a)
    return vecs, dvecs, angles


def _point_kinematics(q, omg, vecs, dvecs, angles):
    """Position, Jacobian (B,2,NQ), and convective acceleration of a point."""
    B = q.shape[0]
    pos = np.zeros((B, 2))
    pos[:, 0] = q[:, 0]
    pos[:, 1] = q[:, 1]
    J = np.zeros((B, 2, NQ))
    J[:, 0, 0] = 1.0
    J[:, 1, 1] = 1.0
    gamma = np.zeros((B, 2))
    for v, dv, k in zip(vecs, dvecs, angles):
        pos += v
        coords = list(_ANGLE_COORDS[k])
        J[:, :, coords] += dv[:, :, None]
        gamma -= v * (omg[:, k] ** 2)[:, None]
    return pos, J, gamma


def _terrain_lookup(heights, x0, dx, px):
    """Ground height and slope under x positions (B,)."""
    if heights.shape[1] == 0:
        z = np.zeros_like(px)
        return z, z
    n = heights.shape[1]
    u = (px - x0) / dx
    i = np.clip(np.floor(u).astype(np.int64), 0, n - 2)
    s = np.clip(u - i, 0.0, 1.0)
    rows = np.arange(heights.shape[0])
    h0 = heights[rows, i]
    h1 = heights[rows, i + 1]
    w = 0.5 * (1.0 - np.cos(np.pi * s))
    h = h0 * (1.0 - w) + h1 * w
    slope = (h1 - h0) * (np.pi / (2.0 * dx)) * np.sin(np.pi * s)
    return h, slope


def _contact_forces_at(params, pos, vel, friction, heights, x0, dx):
    """Penalty normal force + capped viscous Coulomb friction for one point."""
    k_n = params[P_KN]
    d_n = params[P_DN]
    d_t = params[P_DTAN]
    h, slope = _terrain_lookup(heights, x0, dx, pos[:, 0])
    gap = pos[:, 1] - h
    gap_dot = vel[:, 1] - slope * vel[:, 0]
    fn = np.where(gap < 0.0, np.maximum(0.0, -k_n * gap - d_n * gap_dot), 0.0)
    ft = np.clip(-d_t * vel[:, 0], -friction * fn, friction * fn)
    return ft, fn


def _dynamics(params, q, qd, tau, push, payload, friction, heights, x0, dx,
              contact_on, fix_base):
    """Forward dynamics: accelerations plus per-point contact normal forces."""
    B = q.shape[0]
    phi, omg = _angles(q, qd)
    sin_phi, cos_phi = np.sin(phi), np.cos(phi)
    g_vec = np.array([0.0, -params[P_GRAV]])

    M = np.zeros((B, NQ, NQ))
    rhs = np.zeros((B, NQ))

    link_jacobians = []
    for li, terms in enumerate(_LINK_TERMS):
        vecs, dvecs, angles = _term_vectors(params, sin_phi, cos_phi, terms)
        _, J, gamma = _point_kinematics(q, omg, vecs, dvecs, angles)
        link_jacobians.append(J)
        m = params[_LINK_MASS[li]]
        mass = m + payload if li == 0 else np.full(B, m)
        M += mass[:, None, None] * np.einsum("bai,baj->bij", J, J)
        inertia = params[_LINK_INERTIA[li]]
        coords = list(_ANGLE_COORDS[li])
        for a in coords:
            for b in coords:
                M[:, a, b] += inertia
        f = mass[:, None] * (g_vec[None, :] - gamma)
        rhs += np.einsum("bai,ba->bi", J, f)

    # actuation and external pushes
    rhs[:, 3:9] += tau
    rhs[:, 2] += push[:, 1]
    push_force = np.zeros((B, 2))
    push_force[:, 0] = push[:, 0]
    rhs += np.einsum("bai,ba->bi", link_jacobians[0], push_force)

    point_fn = np.zeros((B, 4))
    if contact_on:
        for pi, terms in enumerate(_POINT_TERMS):
            vecs, dvecs, angles = _term_vectors(params, sin_phi, cos_phi, terms)
            pos, J, _ = _point_kinematics(q, omg, vecs, dvecs, angles)
            vel = np.einsum("baj,bj->ba", J, qd)
            ft, fn = _contact_forces_at(params, pos, vel, friction, heights, x0, dx)
            point_fn[:, pi] = fn
            force = np.stack([ft, fn], axis=-1)
            rhs += np.einsum("bai,ba->bi", J, force)

    if fix_base:
        qdd = np.zeros((B, NQ))
        qdd[:, 3:] = np.linalg.solve(M[:, 3:, 3:], rhs[:, 3:, None])[:, :, 0]
    else:
        qdd = np.linalg.solve(M, rhs[:, :, None])[:, :, 0]
    return qdd, point_fn


def _applied_torques(params, q, qd, last_target, new_target, delay, motor_scale,
                     tick, mode):
    kp = params[P_KP : P_KP + 6]
    kd = params[P_KD : P_KD + 6]
    tmax = params[P_TAUMAX : P_TAUMAX + 6]
    if mode == MODE_PD:
        use_new = (tick >= delay)[:, None]
        target = np.where(use_new, new_target, last_target)
        cmd = kp * (target - q[:, 3:9]) - kd * qd[:, 3:9]
    else:
        cmd = new_target
    cmd = np.clip(cmd, -tmax, tmax)
    return motor_scale[:, None] * cmd


def _clamp_joints(params, q, qd):
    lo = params[P_LO : P_LO + 6]
    hi = params[P_HI : P_HI + 6]
    th = q[:, 3:9]
    td = qd[:, 3:9]
    below = th < lo
    above = th > hi
    q[:, 3:9] = np.clip(th, lo, hi)
    qd[:, 3:9] = np.where(below, np.maximum(td, 0.0), np.where(above, np.minimum(td, 0.0), td))


def contact_normal_forces(params, q, qd, friction, heights, x0, dx):
    """Per-point [heel_L, toe_L, heel_R, toe_R] normal forces at a state."""
    phi, omg = _angles(q, qd)
    sin_phi, cos_phi = np.sin(phi), np.cos(phi)
    out = np.zeros((q.shape[0], 4))
    for pi, terms in enumerate(_POINT_TERMS):
        vecs, dvecs, angles = _term_vectors(params, sin_phi, cos_phi, terms)
        pos, J, _ = _point_kinematics(q, omg, vecs, dvecs, angles)
        vel = np.einsum("baj,bj->ba", J, qd)
        _, fn = _contact_forces_at(params, pos, vel, friction, heights, x0, dx)
        out[:, pi] = fn
    return out


def contact_point_heights(params, q, qd, heights, x0, dx):
    """Per-point height above local ground (gap), same point order."""
    phi, omg = _angles(q, qd)
    sin_phi, cos_phi = np.sin(phi), np.cos(phi)
    out = np.zeros((q.shape[0], 4))
    for pi, terms in enumerate(_POINT_TERMS):
        vecs, dvecs, angles = _term_vectors(params, sin_phi, cos_phi, terms)
        pos, _, _ = _point_kinematics(q, omg, vecs, dvecs, angles)
        h, _ = _terrain_lookup(heights, x0, dx, pos[:, 0])
        out[:, pi] = pos[:, 1] - h
    return out


def mechanical_energy(params, q, qd, payload):
    """Total mechanical energy (kinetic + gravitational), shape (B,)."""
    B = q.shape[0]
    phi, omg = _angles(q, qd)
    sin_phi, cos_phi = np.sin(phi), np.cos(phi)
    g = params[P_GRAV]
    total = np.zeros(B)
    for li, terms in enumerate(_LINK_TERMS):
        vecs, dvecs, angles = _term_vectors(params, sin_phi, cos_phi, terms)
        pos, J, _ = _point_kinematics(q, omg, vecs, dvecs, angles)
        vel = np.einsum("baj,bj->ba", J, qd)
        m = params[_LINK_MASS[li]]
        mass = m + payload if li == 0 else np.full(B, m)
        inertia = params[_LINK_INERTIA[li]]
        total += 0.5 * mass * (vel**2).sum(axis=1)
        total += 0.5 * inertia * omg[:, li] ** 2
        total += mass * g * pos[:, 1]
    return total


def step_batch(params, q, qd, last_target, new_target, delay, motor_scale,
               friction, payload, push, terrain_heights, terrain_x0, terrain_dx,
               n_ticks, integrator, mode, fix_base, contact_on, tick0,
               out_tau, out_forces, diverged, env_lo, env_hi):
    """Advance envs [env_lo, env_hi) by n_ticks 1 kHz ticks. See compiled kernel."""
    sl = slice(env_lo, env_hi)
    q_c = q[sl]
    qd_c = qd[sl]
    lt = last_target[sl]
    nt = new_target[sl]
    dl = delay[sl]
    ms = motor_scale[sl]
    fr = friction[sl]
    pl = payload[sl]
    ph = push[sl]
    hv = terrain_heights[sl]
    div = diverged[sl]

    if fix_base:
        qd_c[:, :3] = 0.0

    active = div == -1
    dt = TICK_DT
    tau_out = out_tau[sl]
    for tick in range(n_ticks):
        if not active.any():
            break
        tau = _applied_torques(params, q_c, qd_c, lt, nt, dl, ms, tick, mode)
        if integrator == INTEGRATOR_FAST:
            qdd, _ = _dynamics(params, q_c, qd_c, tau, ph, pl, fr, hv,
                               terrain_x0, terrain_dx, contact_on, fix_base)
            qd_new = qd_c + dt * qdd
            q_new = q_c + dt * qd_new
        else:
            h = dt / RK4_SUBSTEPS
            q_new = q_c.copy()
            qd_new = qd_c.copy()
            for _ in range(RK4_SUBSTEPS):
                a1, _ = _dynamics(params, q_new, qd_new, tau, ph, pl, fr, hv,
                                  terrain_x0, terrain_dx, contact_on, fix_base)
                vq1 = qd_new
                vq2 = qd_new + 0.5 * h * a1
                a2, _ = _dynamics(params, q_new + 0.5 * h * vq1, vq2, tau, ph, pl,
                                  fr, hv, terrain_x0, terrain_dx, contact_on, fix_base)
                vq3 = qd_new + 0.5 * h * a2
                a3, _ = _dynamics(params, q_new + 0.5 * h * vq2, vq3, tau, ph, pl,
                                  fr, hv, terrain_x0, terrain_dx, contact_on, fix_base)
                vq4 = qd_new + h * a3
                a4, _ = _dynamics(params, q_new + h * vq3, vq4, tau, ph, pl,
                                  fr, hv, terrain_x0, terrain_dx, contact_on, fix_base)
                q_new = q_new + (h / 6.0) * (vq1 + 2.0 * vq2 + 2.0 * vq3 + vq4)
                qd_new = qd_new + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        if fix_base:
            qd_new[:, :3] = 0.0
            q_new[:, :3] = q_c[:, :3]
        _clamp_joints(params, q_new, qd_new)

        ok = (
            np.isfinite(q_new).all(axis=1)
            & np.isfinite(qd_new).all(axis=1)
            & (np.abs(qd_new) < 1.0e6).all(axis=1)
        )
        newly_bad = active & ~ok
        div[newly_bad] = tick0 + tick
        upd = active & ok
        q_c[upd] = q_new[upd]
        qd_c[upd] = qd_new[upd]
        tau_out[upd] = tau[upd]
        active = active & ok

    # torque buffer rolls over: the target issued this step becomes "last"
    if mode == MODE_PD:
        lt[active] = nt[active]

    fn = contact_normal_forces(params, q_c, qd_c, fr, hv, terrain_x0, terrain_dx)
    if not contact_on:
        fn[:] = 0.0
    out_forces[sl, 0] = fn[:, 0] + fn[:, 1]
    out_forces[sl, 1] = fn[:, 2] + fn[:, 3]
    diverged[sl] = div
