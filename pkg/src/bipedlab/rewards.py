"""Reward suite for the walking task.

Eleven terms built on the tracking metric phi(e, w) = exp(-w * ||e||^2),
combined as a weighted sum. Tracking terms use the metric directly and
live in (0, 1]; the energy, smoothness, and large-contact entries are raw
non-negative magnitudes that turn into penalties through their negative
weights.

Conventions baked in here:
* the contact-pattern term is the exact w -> infinity limit of phi, i.e.
  a per-foot equality indicator averaged over both feet;
* the large-contact magnitude is sum over feet of clip(F - 400 N, 0, 100)
  (reading the three-argument max of the source table as a clamp, since a
  literal max would never be small);
* velocity-mismatch commands are identically zero;
* all vector terms run over the padded 12-joint layout; padding entries
  are zero on both sides and do not affect the norms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bipedlab.errors import ContractViolation

TARGET_BASE_HEIGHT = 0.7  # m

LARGE_CONTACT_THRESHOLD = 400.0  # N, per-foot force where the penalty starts
LARGE_CONTACT_CAP = 100.0        # N, penalty saturation width

TERM_NAMES = (
    "lin_vel_track",
    "ang_vel_track",
    "orientation_track",
    "base_height_track",
    "velocity_mismatch",
    "contact_pattern",
    "joint_pos_track",
    "default_joint",
    "energy_cost",
    "action_smoothness",
    "large_contact",
)


@dataclass
class RewardWeights:
    """Per-term weights mu_i; defaults follow the task's reward table."""

    lin_vel_track: float = 1.2
    ang_vel_track: float = 1.0
    orientation_track: float = 1.0
    base_height_track: float = 0.5
    velocity_mismatch: float = 0.5
    contact_pattern: float = 1.0
    joint_pos_track: float = 1.5
    default_joint: float = 0.2
    energy_cost: float = -0.0001
    action_smoothness: float = -0.01
    large_contact: float = -0.01

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in TERM_NAMES])


@dataclass
class RewardTerms:
    """Raw per-term values plus the weighted total.

    ``terms[name]`` holds the unweighted r_i (phi terms in (0, 1], penalty
    magnitudes >= 0); ``weighted()`` gives the mu_i * r_i contributions;
    ``total`` is their sum.
    """

    terms: dict
    weights: RewardWeights
    total: np.ndarray

    def weighted(self) -> dict:
        w = self.weights
        return {name: getattr(w, name) * self.terms[name] for name in TERM_NAMES}


def phi(e, w: float):
    """Tracking metric exp(-w * ||e||^2) over the last axis of e."""
    e = np.asarray(e, dtype=np.float64)
    if not np.all(np.isfinite(e)) or not np.isfinite(w) or w < 0.0:
        raise ContractViolation("phi requires finite e and finite w >= 0")
    sq = np.square(e).sum(axis=-1) if e.ndim else np.square(e)
    return np.exp(-w * sq)


def contact_pattern_reward(planned, detected):
    """Mean over feet of [planned == detected]; in {0, 0.5, 1}.

    Exact-indicator realization of phi(I_p - I_d, infinity).
    """
    planned = np.asarray(planned, dtype=np.float64)
    detected = np.asarray(detected, dtype=np.float64)
    return (planned == detected).mean(axis=-1)


def compute_rewards(
    base_lin_vel,        # (..., 3) world [dx, dy, dz], m/s
    base_ang_vel,        # (..., 3) [roll, pitch, yaw] rates, rad/s
    base_rp,             # (..., 2) roll, pitch, rad
    base_height,         # (...,) m
    command,             # (..., 3) [vx, vy, yaw_rate]
    stance_mask,         # (..., 2) planned contact
    contact_detect,      # (..., 2) measured contact
    joint_pos,           # (..., 12) padded
    joint_ref,           # (..., 12) padded gait reference
    joint_default,       # (..., 12) padded nominal pose
    joint_vel,           # (..., 12) padded, rad/s
    torques,             # (..., 12) padded applied torques, N*m
    foot_forces,         # (..., 2) per-foot normal force, N
    action,              # (..., 12) a_t
    action_prev,         # (..., 12) a_{t-1}
    action_prev2,        # (..., 12) a_{t-2}
    weights: RewardWeights,
) -> RewardTerms:
    """Evaluate every reward term for a batch of states."""
    command = np.asarray(command, dtype=np.float64)
    cmd_lin = np.stack(
        [command[..., 0], command[..., 1], np.zeros_like(command[..., 0])], axis=-1
    )
    cmd_ang = np.stack(
        [np.zeros_like(command[..., 2]), np.zeros_like(command[..., 2]), command[..., 2]],
        axis=-1,
    )
    base_ang_vel = np.asarray(base_ang_vel, dtype=np.float64)
    base_lin_vel = np.asarray(base_lin_vel, dtype=np.float64)

    # velocity mismatch tracks [dz, yaw rate, pitch rate] against zero commands
    mismatch_vec = np.stack(
        [base_lin_vel[..., 2], base_ang_vel[..., 2], base_ang_vel[..., 1]], axis=-1
    )

    terms = {
        "lin_vel_track": phi(base_lin_vel - cmd_lin, 5.0),
        "ang_vel_track": phi(base_ang_vel - cmd_ang, 5.0),
        "orientation_track": phi(base_rp, 5.0),
        "base_height_track": phi(
            np.asarray(base_height, dtype=np.float64)[..., None] - TARGET_BASE_HEIGHT, 100.0
        ),
        "velocity_mismatch": phi(mismatch_vec, 5.0),
        "contact_pattern": contact_pattern_reward(stance_mask, contact_detect),
        "joint_pos_track": phi(np.asarray(joint_pos) - np.asarray(joint_ref), 2.0),
        "default_joint": phi(np.asarray(joint_pos) - np.asarray(joint_default), 2.0),
        "energy_cost": (np.abs(torques) * np.abs(joint_vel)).sum(axis=-1),
        "action_smoothness": np.linalg.norm(
            np.asarray(action) - 2.0 * np.asarray(action_prev) + np.asarray(action_prev2),
            axis=-1,
        ),
        "large_contact": np.clip(
            np.asarray(foot_forces) - LARGE_CONTACT_THRESHOLD, 0.0, LARGE_CONTACT_CAP
        ).sum(axis=-1),
    }
    w = weights.as_vector()
    stacked = np.stack([terms[name] for name in TERM_NAMES], axis=-1)
    total = stacked @ w
    return RewardTerms(terms=terms, weights=weights, total=total)
