"""Observation and privileged-state frame assembly and stacking.

Scalar layout is fixed and pinned by golden tests. One observation frame
(47 scalars, in order):

    clock (2) | command (3) | joint_pos (12) | joint_vel (12) |
    base_ang_vel (3) | base_euler (3) | last_action (12)

One privileged frame (73 scalars) prepends the same fields noise-free and
appends:

    friction (1) | payload mass delta (1) | base_lin_vel (3) |
    push_force (2) | push_torque (3) | tracking_diff (12) |
    stance_mask (2) | contact_detect (2)

Joint vectors use the padded 12-slot layout: real joints in slots 0-5
(L_hip, L_knee, L_ankle, R_hip, R_knee, R_ankle), slots 6-11 fixed at 0.
Frames stack most-recent-last; at reset every stack slot holds the
initial frame.
"""

from __future__ import annotations

import numpy as np

from bipedlab.model import NUM_JOINTS, PADDED_JOINTS

OBS_FIELDS = (
    ("clock", 2),
    ("command", 3),
    ("joint_pos", PADDED_JOINTS),
    ("joint_vel", PADDED_JOINTS),
    ("base_ang_vel", 3),
    ("base_euler", 3),
    ("last_action", PADDED_JOINTS),
)
PRIV_EXTRA_FIELDS = (
    ("friction", 1),
    ("payload", 1),
    ("base_lin_vel", 3),
    ("push_force", 2),
    ("push_torque", 3),
    ("tracking_diff", PADDED_JOINTS),
    ("stance_mask", 2),
    ("contact_detect", 2),
)

OBS_DIM = sum(size for _, size in OBS_FIELDS)
PRIV_DIM = OBS_DIM + sum(size for _, size in PRIV_EXTRA_FIELDS)
OBS_STACK = 15
PRIV_STACK = 3
STACKED_OBS_DIM = OBS_DIM * OBS_STACK
STACKED_PRIV_DIM = PRIV_DIM * PRIV_STACK

assert OBS_DIM == 47 and PRIV_DIM == 73


def field_slices(fields):
    """Map field name -> slice into the flat frame."""
    out = {}
    start = 0
    for name, size in fields:
        out[name] = slice(start, start + size)
        start += size
    return out

OBS_SLICES = field_slices(OBS_FIELDS)
PRIV_SLICES = field_slices(OBS_FIELDS + PRIV_EXTRA_FIELDS)


def pad_joints(values):
    """Place per-joint values (..., 6) into the padded 12-slot layout."""
    values = np.asarray(values, dtype=np.float64)
    out = np.zeros(values.shape[:-1] + (PADDED_JOINTS,))
    out[..., :NUM_JOINTS] = values
    return out


def assemble_observation(clock, command, joint_pos12, joint_vel12,
                         base_ang_vel, base_euler, last_action) -> np.ndarray:
    """Concatenate one (batched) observation frame; inputs already padded/noised."""
    return np.concatenate(
        [
            np.asarray(clock, dtype=np.float64),
            np.asarray(command, dtype=np.float64),
            np.asarray(joint_pos12, dtype=np.float64),
            np.asarray(joint_vel12, dtype=np.float64),
            np.asarray(base_ang_vel, dtype=np.float64),
            np.asarray(base_euler, dtype=np.float64),
            np.asarray(last_action, dtype=np.float64),
        ],
        axis=-1,
    )


def assemble_privileged(obs_frame_clean, friction, payload, base_lin_vel,
                        push_force, push_torque, tracking_diff12,
                        stance_mask, contact_detect) -> np.ndarray:
    """Append privileged fields to a noise-free observation frame."""
    one = np.asarray(friction, dtype=np.float64)[..., None]
    pay = np.asarray(payload, dtype=np.float64)[..., None]
    return np.concatenate(
        [
            np.asarray(obs_frame_clean, dtype=np.float64),
            one,
            pay,
            np.asarray(base_lin_vel, dtype=np.float64),
            np.asarray(push_force, dtype=np.float64),
            np.asarray(push_torque, dtype=np.float64),
            np.asarray(tracking_diff12, dtype=np.float64),
            np.asarray(stance_mask, dtype=np.float64),
            np.asarray(contact_detect, dtype=np.float64),
        ],
        axis=-1,
    )


class FrameStack:
    """Fixed-depth frame stack, most-recent-last, flattened per env."""

    def __init__(self, num_envs: int, depth: int, dim: int, dtype=np.float32):
        self.depth = depth
        self.dim = dim
        self.frames = np.zeros((num_envs, depth, dim), dtype=dtype)

    def fill(self, env_ids, frame):
        """Load every slot of selected envs with one frame (episode start)."""
        self.frames[env_ids] = np.asarray(frame, dtype=self.frames.dtype)[:, None, :]

    def push(self, frame):
        """Append a frame for all envs, dropping the oldest."""
        self.frames[:, :-1] = self.frames[:, 1:]
        self.frames[:, -1] = frame

    def flat(self) -> np.ndarray:
        """(E, depth * dim) view-copy, oldest first, newest last."""
        return self.frames.reshape(self.frames.shape[0], -1)
