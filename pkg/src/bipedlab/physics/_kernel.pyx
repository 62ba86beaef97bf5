# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled physics kernel: per-env scalar tick loop.

Mirrors the semantics of ``_kernel_py`` (the pure-numpy fallback). The
dynamics assemble the 9x9 mass matrix of the planar 7-link biped from
link CoM Jacobians and solve it with an in-place Cholesky factorization;
contact uses the penalty normal + capped viscous Coulomb friction model.
Everything runs without the GIL so env chunks can advance on worker
threads.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, floor, isfinite, sin, sqrt

COMPILED = True

# Parameter layout; must match bipedlab.physics.layout.
cdef enum:
    P_MT = 0
    P_MTH = 1
    P_MSH = 2
    P_MFT = 3
    P_IT = 4
    P_ITH = 5
    P_ISH = 6
    P_IFT = 7
    P_CT = 8
    P_LTH = 9
    P_CTH = 10
    P_LSH = 11
    P_CSH = 12
    P_HEELX = 13
    P_TOEX = 14
    P_DROP = 15
    P_FCX = 16
    P_FCZ = 17
    P_GRAV = 18
    P_KN = 19
    P_DN = 20
    P_DTAN = 21
    P_EPSF = 22
    P_KP = 23
    P_KD = 29
    P_TAUMAX = 35
    P_LO = 41
    P_HI = 47

cdef enum:
    INTEGRATOR_FAST = 0
    INTEGRATOR_REFERENCE = 1
    MODE_PD = 0
    MODE_DIRECT_TORQUE = 1

DEF NQ = 9
DEF PI = 3.141592653589793
DEF TICK_DT = 0.001
DEF RK4_SUBSTEPS = 4


cdef inline void _terrain(const double* hf, int nt, double x0, double dx,
                          double px, double* h, double* slope) noexcept nogil:
    cdef double u, s, w, h0, h1
    cdef int i
    if nt == 0:
        h[0] = 0.0
        slope[0] = 0.0
        return
    u = (px - x0) / dx
    i = <int>floor(u)
    if i < 0:
        i = 0
    elif i > nt - 2:
        i = nt - 2
    s = u - i
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    h0 = hf[i]
    h1 = hf[i + 1]
    w = 0.5 * (1.0 - cos(PI * s))
    h[0] = h0 * (1.0 - w) + h1 * w
    slope[0] = (h1 - h0) * (PI / (2.0 * dx)) * sin(PI * s)


cdef inline void _accum_link(double m, double inertia, int ncols, const int* cols,
                             const double* Jx, const double* Jz,
                             double Fx, double Fz,
                             double* M, double* rhs) noexcept nogil:
    """Add one link's m*J^T*J + I*S^T*S (lower triangle) and J^T*F terms.

    cols lists the link's angle coordinates in ascending order; the base
    translation columns (0, 1) have the constant Jacobian [(1,0),(0,1)].
    """
    cdef int i, j, a, b
    M[0] += m            # M[0,0]
    M[NQ + 1] += m       # M[1,1]
    rhs[0] += Fx
    rhs[1] += Fz
    for i in range(ncols):
        a = cols[i]
        M[a * NQ + 0] += m * Jx[a]
        M[a * NQ + 1] += m * Jz[a]
        for j in range(i + 1):
            b = cols[j]
            M[a * NQ + b] += m * (Jx[a] * Jx[b] + Jz[a] * Jz[b]) + inertia
        rhs[a] += Jx[a] * Fx + Jz[a] * Fz


cdef int _eval_dynamics(const double* p, const double* q, const double* qd,
                        const double* tau, double push_fx, double push_tp,
                        double payload, double mu,
                        const double* hf, int nt, double x0, double dx,
                        int contact_on, int fix_base,
                        double* qdd, double* fn_out) noexcept nogil:
    """Forward dynamics; returns 0 on success, 1 if the solve failed."""
    cdef double s0, c0, s1, c1, s2, c2, s3, c3
    cdef double w0, w1, w2, w3
    cdef double M[NQ * NQ]
    cdef double rhs[NQ]
    cdef double Jx[NQ]
    cdef double Jz[NQ]
    cdef int cols[4]
    cdef double L[NQ * NQ]
    cdef double y[NQ]
    cdef int i, j, k, a, side, jc, pt, n, off
    cdef double g = p[P_GRAV]
    cdef double m_t = p[P_MT] + payload
    cdef double m_th = p[P_MTH]
    cdef double m_sh = p[P_MSH]
    cdef double m_ft = p[P_MFT]
    cdef double ct = p[P_CT]
    cdef double lth = p[P_LTH]
    cdef double cth = p[P_CTH]
    cdef double lsh = p[P_LSH]
    cdef double csh = p[P_CSH]
    cdef double fcx = p[P_FCX]
    cdef double fcz = p[P_FCZ]
    cdef double gx, gz, Fx, Fz
    cdef double v1x, v1z, v2x, v2z, v3x, v3z
    cdef double px, pz, vx, vz, hgt, slope, gap, gap_dot, fn, ft, cap
    cdef double ssum, diag

    for i in range(NQ * NQ):
        M[i] = 0.0
    for i in range(NQ):
        rhs[i] = 0.0
        Jx[i] = 0.0
        Jz[i] = 0.0

    s0 = sin(q[2])
    c0 = cos(q[2])
    w0 = qd[2]

    # torso: CoM at base + ct * (-sin, cos); push force acts here
    Jx[2] = -ct * c0
    Jz[2] = -ct * s0
    gx = ct * s0 * w0 * w0
    gz = -ct * c0 * w0 * w0
    Fx = m_t * (0.0 - gx) + push_fx
    Fz = m_t * (-g - gz)
    cols[0] = 2
    _accum_link(m_t, p[P_IT], 1, cols, Jx, Jz, Fx, Fz, M, rhs)
    rhs[2] += push_tp

    for side in range(2):
        jc = 3 + 3 * side
        s1 = sin(q[2] + q[jc])
        c1 = cos(q[2] + q[jc])
        s2 = sin(q[2] + q[jc] + q[jc + 1])
        c2 = cos(q[2] + q[jc] + q[jc + 1])
        s3 = sin(q[2] + q[jc] + q[jc + 1] + q[jc + 2])
        c3 = cos(q[2] + q[jc] + q[jc + 1] + q[jc + 2])
        w1 = qd[2] + qd[jc]
        w2 = w1 + qd[jc + 1]
        w3 = w2 + qd[jc + 2]

        # thigh: CoM at cth * d1
        Jx[2] = cth * c1
        Jz[2] = cth * s1
        Jx[jc] = Jx[2]
        Jz[jc] = Jz[2]
        gx = -cth * s1 * w1 * w1
        gz = cth * c1 * w1 * w1
        Fx = m_th * (0.0 - gx)
        Fz = m_th * (-g - gz)
        cols[0] = 2
        cols[1] = jc
        _accum_link(m_th, p[P_ITH], 2, cols, Jx, Jz, Fx, Fz, M, rhs)

        # shank: lth * d1 + csh * d2
        v1x = lth * c1
        v1z = lth * s1
        v2x = csh * c2
        v2z = csh * s2
        Jx[jc + 1] = v2x
        Jz[jc + 1] = v2z
        Jx[jc] = v1x + v2x
        Jz[jc] = v1z + v2z
        Jx[2] = Jx[jc]
        Jz[2] = Jz[jc]
        gx = -(lth * s1 * w1 * w1 + csh * s2 * w2 * w2)
        gz = lth * c1 * w1 * w1 + csh * c2 * w2 * w2
        Fx = m_sh * (0.0 - gx)
        Fz = m_sh * (-g - gz)
        cols[0] = 2
        cols[1] = jc
        cols[2] = jc + 1
        _accum_link(m_sh, p[P_ISH], 3, cols, Jx, Jz, Fx, Fz, M, rhs)

        # foot: lth * d1 + lsh * d2 + fcx * t3 + fcz * d3
        v2x = lsh * c2
        v2z = lsh * s2
        v3x = -fcx * s3 + fcz * c3
        v3z = fcx * c3 + fcz * s3
        Jx[jc + 2] = v3x
        Jz[jc + 2] = v3z
        Jx[jc + 1] = v2x + v3x
        Jz[jc + 1] = v2z + v3z
        Jx[jc] = v1x + v2x + v3x
        Jz[jc] = v1z + v2z + v3z
        Jx[2] = Jx[jc]
        Jz[2] = Jz[jc]
        gx = -(lth * s1 * w1 * w1 + lsh * s2 * w2 * w2 + (fcx * c3 + fcz * s3) * w3 * w3)
        gz = (lth * c1 * w1 * w1 + lsh * c2 * w2 * w2
              - (fcx * s3 - fcz * c3) * w3 * w3)
        Fx = m_ft * (0.0 - gx)
        Fz = m_ft * (-g - gz)
        cols[0] = 2
        cols[1] = jc
        cols[2] = jc + 1
        cols[3] = jc + 2
        _accum_link(m_ft, p[P_IFT], 4, cols, Jx, Jz, Fx, Fz, M, rhs)

        # contact points: heel (pt 0) and toe (pt 1)
        for pt in range(2):
            fn_out[2 * side + pt] = 0.0
        if contact_on:
            for pt in range(2):
                px = p[P_HEELX] if pt == 0 else p[P_TOEX]
                v3x = -px * s3 + p[P_DROP] * c3
                v3z = px * c3 + p[P_DROP] * s3
                Jx[jc + 2] = v3x
                Jz[jc + 2] = v3z
                Jx[jc + 1] = v2x + v3x
                Jz[jc + 1] = v2z + v3z
                Jx[jc] = v1x + v2x + v3x
                Jz[jc] = v1z + v2z + v3z
                Jx[2] = Jx[jc]
                Jz[2] = Jz[jc]
                pz = q[1] - lth * c1 - lsh * c2 + px * s3 - p[P_DROP] * c3
                px = q[0] + lth * s1 + lsh * s2 + px * c3 + p[P_DROP] * s3
                vx = qd[0] + Jx[2] * qd[2] + Jx[jc] * qd[jc] \
                    + Jx[jc + 1] * qd[jc + 1] + Jx[jc + 2] * qd[jc + 2]
                vz = qd[1] + Jz[2] * qd[2] + Jz[jc] * qd[jc] \
                    + Jz[jc + 1] * qd[jc + 1] + Jz[jc + 2] * qd[jc + 2]
                _terrain(hf, nt, x0, dx, px, &hgt, &slope)
                gap = pz - hgt
                fn = 0.0
                if gap < 0.0:
                    gap_dot = vz - slope * vx
                    fn = -p[P_KN] * gap - p[P_DN] * gap_dot
                    if fn < 0.0:
                        fn = 0.0
                ft = -p[P_DTAN] * vx
                cap = mu * fn
                if ft > cap:
                    ft = cap
                elif ft < -cap:
                    ft = -cap
                fn_out[2 * side + pt] = fn
                rhs[0] += ft
                rhs[1] += fn
                rhs[2] += Jx[2] * ft + Jz[2] * fn
                rhs[jc] += Jx[jc] * ft + Jz[jc] * fn
                rhs[jc + 1] += Jx[jc + 1] * ft + Jz[jc + 1] * fn
                rhs[jc + 2] += Jx[jc + 2] * ft + Jz[jc + 2] * fn

    # joint actuation
    for j in range(6):
        rhs[3 + j] += tau[j]

    # solve M qdd = rhs on the active block via Cholesky (lower triangle)
    if fix_base:
        off = 3
        n = 6
        qdd[0] = 0.0
        qdd[1] = 0.0
        qdd[2] = 0.0
    else:
        off = 0
        n = NQ

    for j in range(n):
        ssum = M[(off + j) * NQ + (off + j)]
        for k in range(j):
            ssum -= L[j * NQ + k] * L[j * NQ + k]
        if not (ssum > 0.0):
            return 1
        diag = sqrt(ssum)
        L[j * NQ + j] = diag
        for i in range(j + 1, n):
            ssum = M[(off + i) * NQ + (off + j)]
            for k in range(j):
                ssum -= L[i * NQ + k] * L[j * NQ + k]
            L[i * NQ + j] = ssum / diag

    for i in range(n):
        ssum = rhs[off + i]
        for k in range(i):
            ssum -= L[i * NQ + k] * y[k]
        y[i] = ssum / L[i * NQ + i]
    for i in range(n - 1, -1, -1):
        ssum = y[i]
        for k in range(i + 1, n):
            ssum -= L[k * NQ + i] * qdd[off + k]
        qdd[off + i] = ssum / L[i * NQ + i]
    return 0


cdef void _pd_torques(const double* p, const double* q, const double* qd,
                      const double* last_t, const double* new_t, int delay,
                      double motor_scale, int tick, int mode,
                      double* tau) noexcept nogil:
    cdef int j
    cdef double target, cmd, tmax
    for j in range(6):
        tmax = p[P_TAUMAX + j]
        if mode == MODE_PD:
            target = new_t[j] if tick >= delay else last_t[j]
            cmd = p[P_KP + j] * (target - q[3 + j]) - p[P_KD + j] * qd[3 + j]
        else:
            cmd = new_t[j]
        if cmd > tmax:
            cmd = tmax
        elif cmd < -tmax:
            cmd = -tmax
        tau[j] = motor_scale * cmd


cdef inline void _clamp_joints(const double* p, double* q, double* qd) noexcept nogil:
    cdef int j
    cdef double lo, hi
    for j in range(6):
        lo = p[P_LO + j]
        hi = p[P_HI + j]
        if q[3 + j] < lo:
            q[3 + j] = lo
            if qd[3 + j] < 0.0:
                qd[3 + j] = 0.0
        elif q[3 + j] > hi:
            q[3 + j] = hi
            if qd[3 + j] > 0.0:
                qd[3 + j] = 0.0


cdef int _advance_env(const double* p, double* q, double* qd,
                      double* last_t, const double* new_t, int delay,
                      double motor_scale, double mu, double payload,
                      double push_fx, double push_tp,
                      const double* hf, int nt, double x0, double dx,
                      int n_ticks, int integrator, int mode,
                      int fix_base, int contact_on, long tick0,
                      double* out_tau, double* out_forces,
                      long* diverged) noexcept nogil:
    cdef double tau[6]
    cdef double qdd[NQ]
    cdef double qprev[NQ]
    cdef double qdprev[NQ]
    cdef double qs[NQ]
    cdef double vs[NQ]
    cdef double a1[NQ]
    cdef double a2[NQ]
    cdef double a3[NQ]
    cdef double a4[NQ]
    cdef double vq1[NQ]
    cdef double vq2[NQ]
    cdef double vq3[NQ]
    cdef double vq4[NQ]
    cdef double fn4[4]
    cdef double h
    cdef int tick, i, sub, bad, rc
    cdef int alive = 1 if diverged[0] == -1 else 0

    if fix_base:
        qd[0] = 0.0
        qd[1] = 0.0
        qd[2] = 0.0

    if alive:
        for tick in range(n_ticks):
            _pd_torques(p, q, qd, last_t, new_t, delay, motor_scale, tick, mode, tau)
            for i in range(NQ):
                qprev[i] = q[i]
                qdprev[i] = qd[i]
            rc = 0
            if integrator == INTEGRATOR_FAST:
                rc = _eval_dynamics(p, q, qd, tau, push_fx, push_tp, payload, mu,
                                    hf, nt, x0, dx, contact_on, fix_base, qdd, fn4)
                if rc == 0:
                    for i in range(NQ):
                        qd[i] = qd[i] + TICK_DT * qdd[i]
                        q[i] = q[i] + TICK_DT * qd[i]
            else:
                h = TICK_DT / RK4_SUBSTEPS
                for sub in range(RK4_SUBSTEPS):
                    rc = _eval_dynamics(p, q, qd, tau, push_fx, push_tp, payload, mu,
                                        hf, nt, x0, dx, contact_on, fix_base, a1, fn4)
                    if rc:
                        break
                    for i in range(NQ):
                        vq1[i] = qd[i]
                        vq2[i] = qd[i] + 0.5 * h * a1[i]
                        qs[i] = q[i] + 0.5 * h * vq1[i]
                        vs[i] = vq2[i]
                    rc = _eval_dynamics(p, qs, vs, tau, push_fx, push_tp, payload, mu,
                                        hf, nt, x0, dx, contact_on, fix_base, a2, fn4)
                    if rc:
                        break
                    for i in range(NQ):
                        vq3[i] = qd[i] + 0.5 * h * a2[i]
                        qs[i] = q[i] + 0.5 * h * vq2[i]
                        vs[i] = vq3[i]
                    rc = _eval_dynamics(p, qs, vs, tau, push_fx, push_tp, payload, mu,
                                        hf, nt, x0, dx, contact_on, fix_base, a3, fn4)
                    if rc:
                        break
                    for i in range(NQ):
                        vq4[i] = qd[i] + h * a3[i]
                        qs[i] = q[i] + h * vq3[i]
                        vs[i] = vq4[i]
                    rc = _eval_dynamics(p, qs, vs, tau, push_fx, push_tp, payload, mu,
                                        hf, nt, x0, dx, contact_on, fix_base, a4, fn4)
                    if rc:
                        break
                    for i in range(NQ):
                        q[i] = q[i] + (h / 6.0) * (vq1[i] + 2.0 * vq2[i] + 2.0 * vq3[i] + vq4[i])
                        qd[i] = qd[i] + (h / 6.0) * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i])
            if rc == 0:
                if fix_base:
                    qd[0] = 0.0
                    qd[1] = 0.0
                    qd[2] = 0.0
                    q[0] = qprev[0]
                    q[1] = qprev[1]
                    q[2] = qprev[2]
                _clamp_joints(p, q, qd)
            bad = rc
            if bad == 0:
                for i in range(NQ):
                    if (not isfinite(q[i])) or (not isfinite(qd[i])) or fabs(qd[i]) >= 1.0e6:
                        bad = 1
                        break
            if bad:
                diverged[0] = tick0 + tick
                for i in range(NQ):
                    q[i] = qprev[i]
                    qd[i] = qdprev[i]
                alive = 0
                break
            for i in range(6):
                out_tau[i] = tau[i]

        if alive and mode == MODE_PD:
            for i in range(6):
                last_t[i] = new_t[i]

    # contact forces at the final state (matches the fallback's final query)
    _final_contact_forces(p, q, qd, mu, hf, nt, x0, dx, contact_on, out_forces)
    return 0


cdef void _final_contact_forces(const double* p, const double* q, const double* qd,
                                double mu, const double* hf, int nt,
                                double x0, double dx, int contact_on,
                                double* out_forces) noexcept nogil:
    cdef double s1, c1, s2, c2, s3, c3
    cdef double jx2, jz2, jxa, jza, jxb, jzb, jxc, jzc
    cdef double v1x, v1z, v2x, v2z, v3x, v3z
    cdef double px, pz, vx, vz, hgt, slope, gap, gap_dot, fn
    cdef double lth = p[P_LTH]
    cdef double lsh = p[P_LSH]
    cdef int side, pt, jc
    out_forces[0] = 0.0
    out_forces[1] = 0.0
    if not contact_on:
        return
    for side in range(2):
        jc = 3 + 3 * side
        s1 = sin(q[2] + q[jc])
        c1 = cos(q[2] + q[jc])
        s2 = sin(q[2] + q[jc] + q[jc + 1])
        c2 = cos(q[2] + q[jc] + q[jc + 1])
        s3 = sin(q[2] + q[jc] + q[jc + 1] + q[jc + 2])
        c3 = cos(q[2] + q[jc] + q[jc + 1] + q[jc + 2])
        v1x = lth * c1
        v1z = lth * s1
        v2x = lsh * c2
        v2z = lsh * s2
        for pt in range(2):
            px = p[P_HEELX] if pt == 0 else p[P_TOEX]
            v3x = -px * s3 + p[P_DROP] * c3
            v3z = px * c3 + p[P_DROP] * s3
            jxc = v3x
            jzc = v3z
            jxb = v2x + v3x
            jzb = v2z + v3z
            jxa = v1x + v2x + v3x
            jza = v1z + v2z + v3z
            jx2 = jxa
            jz2 = jza
            pz = q[1] - lth * c1 - lsh * c2 + px * s3 - p[P_DROP] * c3
            px = q[0] + lth * s1 + lsh * s2 + px * c3 + p[P_DROP] * s3
            vx = qd[0] + jx2 * qd[2] + jxa * qd[jc] + jxb * qd[jc + 1] + jxc * qd[jc + 2]
            vz = qd[1] + jz2 * qd[2] + jza * qd[jc] + jzb * qd[jc + 1] + jzc * qd[jc + 2]
            _terrain(hf, nt, x0, dx, px, &hgt, &slope)
            gap = pz - hgt
            fn = 0.0
            if gap < 0.0:
                gap_dot = vz - slope * vx
                fn = -p[P_KN] * gap - p[P_DN] * gap_dot
                if fn < 0.0:
                    fn = 0.0
            out_forces[side] += fn


def step_batch(double[::1] params,
               double[:, ::1] q, double[:, ::1] qd,
               double[:, ::1] last_target, double[:, ::1] new_target,
               int[::1] delay, double[::1] motor_scale, double[::1] friction,
               double[::1] payload, double[:, ::1] push,
               double[:, ::1] terrain_heights, double terrain_x0, double terrain_dx,
               int n_ticks, int integrator, int mode, int fix_base, int contact_on,
               long tick0, double[:, ::1] out_tau, double[:, ::1] out_forces,
               long[::1] diverged, int env_lo, int env_hi):
    """Advance envs [env_lo, env_hi) by n_ticks. See _kernel_py.step_batch."""
    cdef int e
    cdef int nt = terrain_heights.shape[1]
    cdef const double* hf_base = NULL
    if nt > 0:
        hf_base = &terrain_heights[0, 0]
    with nogil:
        for e in range(env_lo, env_hi):
            _advance_env(
                &params[0], &q[e, 0], &qd[e, 0], &last_target[e, 0],
                &new_target[e, 0], delay[e], motor_scale[e], friction[e],
                payload[e], push[e, 0], push[e, 1],
                hf_base + e * nt if nt > 0 else NULL, nt, terrain_x0, terrain_dx,
                n_ticks, integrator, mode, fix_base, contact_on, tick0,
                &out_tau[e, 0], &out_forces[e, 0], &diverged[e])
    return None
