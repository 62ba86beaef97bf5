"""Gait clock, periodic stance mask, and sinusoidal reference motion.

One gait cycle of duration ``cycle_time`` contains, in phase order: a
double-support window [0, d), a left-swing window [d, 0.5), a second
double-support window [0.5, 0.5+d), and a right-swing window [0.5+d, 1),
where d = ``ds_fraction``. During a leg's swing window its hip/knee/ankle
targets follow a half-sine bump away from the nominal pose; everywhere
else they equal the nominal pose, so reference motion and stance mask are
synchronized by construction: a leg deviates from nominal only while its
mask entry is 0.

All functions are pure in (t, config) and broadcast over array-valued t.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from bipedlab.errors import ConfigError
from bipedlab.model import NUM_JOINTS

# Flexion sign of the swing bump per leg joint (hip, knee, ankle): the knee
# bends backward to give foot clearance while hip+ankle keep the foot level.
_SWING_SIGNS = np.array([1.0, -1.0, 1.0])


@dataclass
class GaitConfig:
    cycle_time: float = 0.64    # s, one full gait cycle
    ds_fraction: float = 0.1    # fraction of the cycle per double-support window
    hip_amplitude: float = 0.35     # rad, swing bump peak
    knee_amplitude: float = 0.6     # rad
    ankle_amplitude: float = 0.25   # rad
    theta0: np.ndarray = field(default_factory=lambda: np.zeros(NUM_JOINTS))

    def __post_init__(self):
        self.theta0 = np.asarray(self.theta0, dtype=np.float64)
        if not self.cycle_time > 0.0:
            raise ConfigError("cycle_time must be positive")
        if not (0.0 <= self.ds_fraction < 0.5):
            raise ConfigError("ds_fraction must lie in [0, 0.5)")
        if self.theta0.shape != (NUM_JOINTS,):
            raise ConfigError(f"theta0 must have length {NUM_JOINTS}")

    @property
    def amplitudes(self) -> np.ndarray:
        """Signed per-joint swing deltas (hip, knee, ankle)."""
        return _SWING_SIGNS * np.array(
            [self.hip_amplitude, self.knee_amplitude, self.ankle_amplitude]
        )


@dataclass
class GaitPhase:
    """Gait state at one instant: phase, clock pair, stance mask, joint targets."""

    phase: float
    clock: tuple
    stance_mask: np.ndarray
    theta_ref: np.ndarray


def clock_signal(t, cycle_time: float):
    """Periodic clock (sin(2*pi*t/C), cos(2*pi*t/C))."""
    if not cycle_time > 0.0:
        raise ConfigError("cycle_time must be positive")
    arg = 2.0 * np.pi * np.asarray(t, dtype=np.float64) / cycle_time
    return np.sin(arg), np.cos(arg)


def stance_mask(t, cfg: GaitConfig) -> np.ndarray:
    """Planned contact mask (left, right); 1 = stance expected, 0 = swing.

    Never returns [0, 0]: the cycle has no flight phase.
    """
    phase = np.mod(np.asarray(t, dtype=np.float64) / cfg.cycle_time, 1.0)
    d = cfg.ds_fraction
    left_swing = (phase >= d) & (phase < 0.5)
    right_swing = phase >= 0.5 + d
    left = np.where(left_swing, 0.0, 1.0)
    right = np.where(right_swing, 0.0, 1.0)
    return np.stack([left, right], axis=-1)


def _swing_bump(phase, start, end):
    """Half-sine bump in [0, 1], nonzero only for phase in (start, end)."""
    s = (phase - start) / (end - start)
    inside = (s > 0.0) & (s < 1.0)
    return np.where(inside, np.sin(np.pi * np.clip(s, 0.0, 1.0)), 0.0)


def reference_motion(t, cfg: GaitConfig) -> np.ndarray:
    """Reference joint targets theta_ref(t), shape (..., NUM_JOINTS).

    The swinging leg's hip/knee/ankle follow a half-sine bump of the
    configured amplitudes on top of theta0; the stance leg holds theta0.
    Continuous in t (the bump vanishes at both window edges).
    """
    phase = np.mod(np.asarray(t, dtype=np.float64) / cfg.cycle_time, 1.0)
    d = cfg.ds_fraction
    bump_l = _swing_bump(phase, d, 0.5)
    bump_r = _swing_bump(phase, 0.5 + d, 1.0)
    amp = cfg.amplitudes
    theta = np.broadcast_to(cfg.theta0, phase.shape + (NUM_JOINTS,)).copy()
    theta[..., 0:3] += bump_l[..., None] * amp
    theta[..., 3:6] += bump_r[..., None] * amp
    return theta


def gait_phase(t: float, cfg: GaitConfig) -> GaitPhase:
    """Bundle phase, clock, stance mask, and reference targets at time t."""
    phase = float(np.mod(t / cfg.cycle_time, 1.0))
    s, c = clock_signal(t, cfg.cycle_time)
    return GaitPhase(
        phase=phase,
        clock=(float(s), float(c)),
        stance_mask=stance_mask(t, cfg),
        theta_ref=reference_motion(t, cfg),
    )
