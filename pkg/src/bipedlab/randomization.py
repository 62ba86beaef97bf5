"""Domain randomization: per-episode physics draws and per-step sensor noise.

Ranges follow the randomization table. Gaussian entries treat the range
half-width as one standard deviation and are truncated (clipped) at the
range bounds, so every sample is guaranteed in-table. The system delay
is drawn uniformly in milliseconds and quantized to whole 1 kHz ticks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class RandomizationConfig:
    enabled: bool = True
    # per-episode physics draws
    friction_min: float = 0.1       # Coulomb coefficient, uniform
    friction_max: float = 2.0
    motor_strength_min: float = 0.95  # torque scale, Gaussian(1 sigma), truncated
    motor_strength_max: float = 1.05
    payload_min: float = -5.0       # kg added to the torso, Gaussian(1 sigma)
    payload_max: float = 5.0
    delay_min_ms: float = 0.0       # actuation delay, uniform then tick-quantized
    delay_max_ms: float = 10.0
    # per-step observation noise (additive Gaussian(1 sigma), truncated)
    noise_joint_pos: float = 0.05   # rad
    noise_joint_vel: float = 0.5    # rad/s
    noise_ang_vel: float = 0.1      # rad/s
    noise_euler: float = 0.03       # rad


@dataclass
class RandomizationDraw:
    """One episode's physics randomization for a batch of envs."""

    friction: np.ndarray      # (E,)
    motor_scale: np.ndarray   # (E,)
    payload: np.ndarray       # (E,) kg
    delay_ticks: np.ndarray   # (E,) int32 in [0, 10]
    delay_ms: np.ndarray      # (E,) the raw continuous draw


def truncated_gaussian(rng, lo: float, hi: float, size=None):
    """Gaussian centered on the range midpoint, sigma = half-width, clipped."""
    center = 0.5 * (lo + hi)
    sigma = 0.5 * (hi - lo)
    return np.clip(center + sigma * rng.standard_normal(size), lo, hi)


def draw_episode(rng, cfg: RandomizationConfig, size=None) -> RandomizationDraw:
    """Sample per-episode physics randomization (identity when disabled)."""
    shape = () if size is None else (size,)
    if not cfg.enabled:
        return RandomizationDraw(
            friction=np.full(shape, 1.0),
            motor_scale=np.ones(shape),
            payload=np.zeros(shape),
            delay_ticks=np.zeros(shape, dtype=np.int32),
            delay_ms=np.zeros(shape),
        )
    delay_ms = rng.uniform(cfg.delay_min_ms, cfg.delay_max_ms, size)
    return RandomizationDraw(
        friction=rng.uniform(cfg.friction_min, cfg.friction_max, size),
        motor_scale=truncated_gaussian(rng, cfg.motor_strength_min, cfg.motor_strength_max, size),
        payload=truncated_gaussian(rng, cfg.payload_min, cfg.payload_max, size),
        delay_ticks=np.rint(delay_ms).astype(np.int32),
        delay_ms=np.asarray(delay_ms),
    )


def observation_noise(rng, cfg: RandomizationConfig):
    """Per-step additive noise: (joint_pos[6], joint_vel[6], ang_vel[3], euler[3]).

    Only physical channels are noised; the padded joint entries of the
    observation layout stay exactly zero.
    """
    if not cfg.enabled:
        z = np.zeros(18)
        return z[0:6], z[6:12], z[12:15], z[15:18]
    draws = rng.standard_normal(18)
    jp = np.clip(cfg.noise_joint_pos * draws[0:6], -cfg.noise_joint_pos, cfg.noise_joint_pos)
    jv = np.clip(cfg.noise_joint_vel * draws[6:12], -cfg.noise_joint_vel, cfg.noise_joint_vel)
    av = np.clip(cfg.noise_ang_vel * draws[12:15], -cfg.noise_ang_vel, cfg.noise_ang_vel)
    eu = np.clip(cfg.noise_euler * draws[15:18], -cfg.noise_euler, cfg.noise_euler)
    return jp, jv, av, eu
