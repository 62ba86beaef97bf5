"""Robot description and low-level state types for the planar biped.

The robot is a 7-link sagittal-plane mechanism: a torso and, per leg, a
thigh, shank, and foot. Six actuated pitch joints (hip, knee, ankle per
leg), ordered [L_hip, L_knee, L_ankle, R_hip, R_knee, R_ankle]. The base
frame sits at the (coincident) hip axes. Out-of-plane quantities (y,
roll, yaw) are identically zero but kept in the 6-dim pose layout.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from bipedlab.errors import ConfigError, ContractViolation

NUM_JOINTS = 6
JOINT_NAMES = ("L_hip", "L_knee", "L_ankle", "R_hip", "R_knee", "R_ankle")

# Padded joint count used by the observation/action layout.
PADDED_JOINTS = 12


def wrap_angle(a):
    """Wrap angle(s) to (-pi, pi]."""
    a = np.asarray(a, dtype=np.float64)
    wrapped = a - 2.0 * np.pi * np.floor((a + np.pi) / (2.0 * np.pi))
    # floor maps +pi to -pi; fold it back to the half-open upper end
    wrapped = np.where(wrapped <= -np.pi, wrapped + 2.0 * np.pi, wrapped)
    return wrapped if wrapped.ndim else float(wrapped)


@dataclass
class BasePose:
    """6-dim base pose [x, y, z, roll, pitch, yaw]; planar fields stay 0."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.x, self.y, self.z, self.roll, self.pitch, self.yaw], dtype=np.float64
        )


@dataclass
class JointState:
    """Joint positions and velocities, length NUM_JOINTS each."""

    theta: np.ndarray
    theta_dot: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        self.theta_dot = np.asarray(self.theta_dot, dtype=np.float64)
        if self.theta.shape != self.theta_dot.shape:
            raise ContractViolation(
                f"theta shape {self.theta.shape} != theta_dot shape {self.theta_dot.shape}"
            )


@dataclass
class ContactState:
    """Per-foot normal forces [N] and thresholded contact flags."""

    foot_force_left: float
    foot_force_right: float
    in_contact_left: bool
    in_contact_right: bool

    def forces(self) -> np.ndarray:
        return np.array([self.foot_force_left, self.foot_force_right])

    def flags(self) -> np.ndarray:
        return np.array([self.in_contact_left, self.in_contact_right], dtype=np.float64)


@dataclass
class ExternalDisturbance:
    """Horizontal push force [N] (x, y) and torque [N*m] (roll, pitch, yaw)."""

    force: np.ndarray = field(default_factory=lambda: np.zeros(2))
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.force = np.asarray(self.force, dtype=np.float64)
        self.torque = np.asarray(self.torque, dtype=np.float64)
        if self.force.shape != (2,) or self.torque.shape != (3,):
            raise ContractViolation("disturbance must be force (2,) and torque (3,)")
        if not (np.all(np.isfinite(self.force)) and np.all(np.isfinite(self.torque))):
            raise ContractViolation("disturbance must be finite")


@dataclass
class RobotDescription:
    """Physical parameters of the planar biped (symmetric legs).

    Lengths in m, masses in kg, inertias in kg*m^2 (about link CoM),
    gains in N*m/rad and N*m*s/rad, torques in N*m, angles in rad.
    """

    torso_mass: float = 14.0
    torso_inertia: float = 0.29
    torso_com: float = 0.25          # CoM height above hip along torso axis

    thigh_mass: float = 3.5
    thigh_inertia: float = 0.030
    thigh_length: float = 0.32
    thigh_com: float = 0.16          # hip-to-CoM distance along the link

    shank_mass: float = 3.0
    shank_inertia: float = 0.026
    shank_length: float = 0.32
    shank_com: float = 0.16

    foot_mass: float = 1.5
    foot_inertia: float = 0.004
    heel_x: float = -0.09            # heel contact point, fore-aft offset from ankle
    toe_x: float = 0.09              # toe contact point
    sole_drop: float = 0.06          # ankle axis height above the sole
    foot_com_x: float = 0.0          # foot CoM fore-aft offset from ankle
    foot_com_drop: float = 0.03      # foot CoM depth below ankle

    kp: np.ndarray = field(default_factory=lambda: np.full(NUM_JOINTS, 80.0))
    kd: np.ndarray = field(default_factory=lambda: np.full(NUM_JOINTS, 2.0))
    torque_limit: np.ndarray = field(default_factory=lambda: np.full(NUM_JOINTS, 100.0))

    joint_lower: np.ndarray = field(
        default_factory=lambda: np.array([-1.2, -2.2, -1.0, -1.2, -2.2, -1.0])
    )
    joint_upper: np.ndarray = field(
        default_factory=lambda: np.array([1.2, 0.1, 1.0, 1.2, 0.1, 1.0])
    )
    # Nominal standing pose: straight legs, flat feet.
    theta0: np.ndarray = field(default_factory=lambda: np.zeros(NUM_JOINTS))

    def __post_init__(self):
        for name in ("kp", "kd", "torque_limit", "joint_lower", "joint_upper", "theta0"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim == 0:
                arr = np.full(NUM_JOINTS, float(arr))
            if arr.shape != (NUM_JOINTS,):
                raise ConfigError(f"robot field '{name}' must have length {NUM_JOINTS}")
            setattr(self, name, arr)
        self.validate()

    def validate(self):
        positive = {
            "torso_mass": self.torso_mass,
            "torso_inertia": self.torso_inertia,
            "thigh_mass": self.thigh_mass,
            "thigh_inertia": self.thigh_inertia,
            "thigh_length": self.thigh_length,
            "shank_mass": self.shank_mass,
            "shank_inertia": self.shank_inertia,
            "shank_length": self.shank_length,
            "foot_mass": self.foot_mass,
            "foot_inertia": self.foot_inertia,
            "sole_drop": self.sole_drop,
        }
        for name, value in positive.items():
            if not (value > 0.0 and math.isfinite(value)):
                raise ConfigError(f"robot field '{name}' must be strictly positive")
        if np.any(self.kp < 0.0) or np.any(self.kd < 0.0):
            raise ConfigError("PD gains must be non-negative")
        if np.any(self.torque_limit <= 0.0):
            raise ConfigError("torque limits must be strictly positive")
        if np.any(self.joint_lower >= self.joint_upper):
            raise ConfigError("joint_lower must be below joint_upper")
        if np.any(self.theta0 < self.joint_lower) or np.any(self.theta0 > self.joint_upper):
            raise ConfigError("nominal pose theta0 must lie inside the joint limits")
        if self.heel_x >= self.toe_x:
            raise ConfigError("heel_x must be behind toe_x")

    @property
    def total_mass(self) -> float:
        return self.torso_mass + 2.0 * (self.thigh_mass + self.shank_mass + self.foot_mass)

    def standing_height(self) -> float:
        """Base height above the sole at the nominal pose theta0 (flat ground)."""
        h = [self.theta0[0], self.theta0[3]]
        k = [self.theta0[1], self.theta0[4]]
        heights = []
        for hip, knee in zip(h, k):
            heights.append(
                self.thigh_length * math.cos(hip)
                + self.shank_length * math.cos(hip + knee)
                + self.sole_drop
            )
        return min(heights)


def pd_torques(desc: RobotDescription, theta_target: np.ndarray, js: JointState) -> np.ndarray:
    """PD servo: tau_i = clamp(kp_i*(target_i - theta_i) - kd_i*theta_dot_i, +-limit)."""
    theta_target = np.asarray(theta_target, dtype=np.float64)
    if theta_target.shape != (NUM_JOINTS,) or js.theta.shape != (NUM_JOINTS,):
        raise ContractViolation(
            f"expected vectors of length {NUM_JOINTS}, got target {theta_target.shape}, "
            f"theta {js.theta.shape}"
        )
    tau = desc.kp * (theta_target - js.theta) - desc.kd * js.theta_dot
    return np.clip(tau, -desc.torque_limit, desc.torque_limit)


# ---------------------------------------------------------------------------
# Robot description file format: INI sections, units noted in comments.
# ---------------------------------------------------------------------------

_SCALARS = (
    "torso_mass", "torso_inertia", "torso_com",
    "thigh_mass", "thigh_inertia", "thigh_length", "thigh_com",
    "shank_mass", "shank_inertia", "shank_length", "shank_com",
    "foot_mass", "foot_inertia",
    "heel_x", "toe_x", "sole_drop", "foot_com_x", "foot_com_drop",
)
_VECTORS = ("kp", "kd", "torque_limit", "joint_lower", "joint_upper", "theta0")

_UNIT_COMMENTS = {
    "links": "masses kg, inertias kg*m^2 about link CoM, lengths/offsets m",
    "joints": f"per-joint vectors, order {', '.join(JOINT_NAMES)};"
    " gains N*m/rad and N*m*s/rad, limits rad, torques N*m",
}


def load_robot_file(path: str) -> RobotDescription:
    """Load a RobotDescription from an INI file with [links] and [joints] sections."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"robot file not found: {path}")
    kwargs = {}
    try:
        for name in _SCALARS:
            if parser.has_option("links", name):
                kwargs[name] = parser.getfloat("links", name)
        for name in _VECTORS:
            if parser.has_option("joints", name):
                values = [float(v) for v in parser.get("joints", name).split(",")]
                kwargs[name] = np.asarray(values)
    except (configparser.Error, ValueError) as exc:
        raise ConfigError(f"malformed robot file {path}: {exc}") from exc
    for section in parser.sections():
        if section not in ("links", "joints"):
            raise ConfigError(f"unknown section [{section}] in robot file {path}")
        known = _SCALARS if section == "links" else _VECTORS
        for key in parser.options(section):
            if key not in known:
                raise ConfigError(f"unknown key '{key}' in [{section}] of {path}")
    return RobotDescription(**kwargs)


def dump_robot_file(desc: RobotDescription) -> str:
    """Serialize a RobotDescription to the INI robot-file format."""
    out = io.StringIO()
    out.write(f"[links]  ; {_UNIT_COMMENTS['links']}\n")
    for name in _SCALARS:
        out.write(f"{name} = {getattr(desc, name)!r}\n")
    out.write(f"\n[joints]  ; {_UNIT_COMMENTS['joints']}\n")
    for name in _VECTORS:
        values = ", ".join(repr(float(v)) for v in getattr(desc, name))
        out.write(f"{name} = {values}\n")
    return out.getvalue()


def save_robot_file(desc: RobotDescription, path: str):
    with open(path, "w") as fh:
        fh.write(dump_robot_file(desc))


def default_robot() -> RobotDescription:
    """The stock 30 kg desk-scale biped (0.7 m standing base height)."""
    return RobotDescription()


def with_pendulum_ankles(desc: RobotDescription) -> RobotDescription:
    """Variant with ankle joints locked at zero (double-pendulum legs)."""
    lower = desc.joint_lower.copy()
    upper = desc.joint_upper.copy()
    lower[[2, 5]] = 0.0
    upper[[2, 5]] = 1e-9
    return replace(desc, joint_lower=lower, joint_upper=upper)
