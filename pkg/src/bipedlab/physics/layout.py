"""Packed parameter-vector layout shared by the physics kernels.

Both the compiled kernel and the pure-numpy kernel read the same flat
float64 parameter vector. Index constants here are the single source of
truth on the Python side; the compiled kernel hard-codes the same layout
and a cross-implementation test pins their agreement.
"""

from __future__ import annotations

import numpy as np

from bipedlab.model import NUM_JOINTS, RobotDescription

# link masses / inertias
P_MT, P_MTH, P_MSH, P_MFT = 0, 1, 2, 3
P_IT, P_ITH, P_ISH, P_IFT = 4, 5, 6, 7
# geometry
P_CT, P_LTH, P_CTH, P_LSH, P_CSH = 8, 9, 10, 11, 12
P_HEELX, P_TOEX, P_DROP, P_FCX, P_FCZ = 13, 14, 15, 16, 17
# world / contact model
P_GRAV, P_KN, P_DN, P_DTAN, P_EPSF = 18, 19, 20, 21, 22
# per-joint vectors
P_KP = 23
P_KD = P_KP + NUM_JOINTS
P_TAUMAX = P_KD + NUM_JOINTS
P_LO = P_TAUMAX + NUM_JOINTS
P_HI = P_LO + NUM_JOINTS
NPARAMS = P_HI + NUM_JOINTS

# state layout: q = [x, z, pitch, L_hip, L_knee, L_ankle, R_hip, R_knee, R_ankle]
NQ = 9
IDX_X, IDX_Z, IDX_PITCH = 0, 1, 2
IDX_JOINTS = slice(3, 3 + NUM_JOINTS)

TICK_DT = 0.001  # 1 kHz inner tick
RK4_SUBSTEPS = 4  # reference backend integrates at 4 kHz

INTEGRATOR_FAST = 0       # semi-implicit Euler at 1 kHz
INTEGRATOR_REFERENCE = 1  # classic RK4 at 4 kHz, resampled to 1 kHz

MODE_PD = 0            # new_target holds PD position targets
MODE_DIRECT_TORQUE = 1  # new_target holds joint torques


def pack_params(
    desc: RobotDescription,
    gravity: float = 9.81,
    contact_stiffness: float = 2.0e4,
    contact_damping: float = 200.0,
    friction_damping: float = 600.0,
    contact_force_eps: float = 1.0,
) -> np.ndarray:
    """Flatten a RobotDescription plus world constants into the kernel vector."""
    p = np.zeros(NPARAMS, dtype=np.float64)
    p[P_MT] = desc.torso_mass
    p[P_MTH] = desc.thigh_mass
    p[P_MSH] = desc.shank_mass
    p[P_MFT] = desc.foot_mass
    p[P_IT] = desc.torso_inertia
    p[P_ITH] = desc.thigh_inertia
    p[P_ISH] = desc.shank_inertia
    p[P_IFT] = desc.foot_inertia
    p[P_CT] = desc.torso_com
    p[P_LTH] = desc.thigh_length
    p[P_CTH] = desc.thigh_com
    p[P_LSH] = desc.shank_length
    p[P_CSH] = desc.shank_com
    p[P_HEELX] = desc.heel_x
    p[P_TOEX] = desc.toe_x
    p[P_DROP] = desc.sole_drop
    p[P_FCX] = desc.foot_com_x
    p[P_FCZ] = desc.foot_com_drop
    p[P_GRAV] = gravity
    p[P_KN] = contact_stiffness
    p[P_DN] = contact_damping
    p[P_DTAN] = friction_damping
    p[P_EPSF] = contact_force_eps
    p[P_KP : P_KP + NUM_JOINTS] = desc.kp
    p[P_KD : P_KD + NUM_JOINTS] = desc.kd
    p[P_TAUMAX : P_TAUMAX + NUM_JOINTS] = desc.torque_limit
    p[P_LO : P_LO + NUM_JOINTS] = desc.joint_lower
    p[P_HI : P_HI + NUM_JOINTS] = desc.joint_upper
    return p
