"""Batched simulation engine over the tick kernels.

One engine instance owns the full state of ``num_envs`` independent
copies of the robot (no shared mutable state between copies), advances
them through 1 kHz PD+dynamics ticks, and exposes contact and base-state
queries. Envs may be advanced in chunks across worker threads; per-env
trajectories never depend on the chunking.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

import bipedlab.physics as physics_pkg
from bipedlab.errors import ConfigError, ContractViolation, SimulationDiverged
from bipedlab.model import NUM_JOINTS, ContactState, ExternalDisturbance, RobotDescription
from bipedlab.physics import _kernel_py
from bipedlab.physics.layout import (
    INTEGRATOR_FAST,
    INTEGRATOR_REFERENCE,
    MODE_DIRECT_TORQUE,
    MODE_PD,
    NQ,
    TICK_DT,
    pack_params,
)
from bipedlab.terrain import Heightfield

BACKENDS = ("fast", "reference")
_INTEGRATORS = {"fast": INTEGRATOR_FAST, "reference": INTEGRATOR_REFERENCE}

CONTROL_TICKS = 10  # 1 kHz PD ticks per 100 Hz policy step


@dataclass
class WorldParams:
    """World and contact-model constants."""

    gravity: float = 9.81               # m/s^2
    contact_stiffness: float = 2.0e4    # N/m, penalty spring
    contact_damping: float = 200.0      # N*s/m, penalty damper
    friction_damping: float = 600.0     # N*s/m, viscous pre-slip friction
    contact_force_eps: float = 1.0      # N, contact detection threshold


@dataclass
class StepResult:
    """Outputs of one batched advance."""

    applied_torque: np.ndarray   # (E, 6) torques applied at the last tick
    foot_forces: np.ndarray      # (E, 2) per-foot normal force at the final state
    contacts: np.ndarray         # (E, 2) boolean contact flags
    diverged: np.ndarray         # (E,) bool, envs that went non-finite


class PhysicsEngine:
    """Batched planar-biped simulator behind a fixed backend."""

    def __init__(
        self,
        desc: RobotDescription,
        num_envs: int = 1,
        backend: str = "fast",
        world: WorldParams | None = None,
        terrain: Heightfield | list | None = None,
        fix_base: bool = False,
        contact_enabled: bool = True,
        workers: int = 1,
        kernel=None,
    ):
        if backend not in BACKENDS:
            raise ConfigError(f"unknown backend '{backend}' (expected one of {BACKENDS})")
        self.desc = desc
        self.backend = backend
        self.num_envs = int(num_envs)
        self.world = world or WorldParams()
        self.fix_base = bool(fix_base)
        self.contact_enabled = bool(contact_enabled)
        self.workers = max(1, int(workers))
        self._kernel = kernel if kernel is not None else physics_pkg.active_kernel()
        self._integrator = _INTEGRATORS[backend]

        self.params = pack_params(
            desc,
            gravity=self.world.gravity,
            contact_stiffness=self.world.contact_stiffness,
            contact_damping=self.world.contact_damping,
            friction_damping=self.world.friction_damping,
            contact_force_eps=self.world.contact_force_eps,
        )

        E = self.num_envs
        self.q = np.zeros((E, NQ))
        self.qd = np.zeros((E, NQ))
        self.last_target = np.tile(desc.theta0, (E, 1))
        self.motor_scale = np.ones(E)
        self.friction = np.full(E, 1.0)
        self.payload = np.zeros(E)
        self.delay_ticks = np.zeros(E, dtype=np.int32)
        self.diverged = np.full(E, -1, dtype=np.int64)
        self.tick_count = 0

        self.set_terrain(terrain)
        self._pool = None
        self.reset_envs(np.arange(E))

    # -- state management ---------------------------------------------------

    def set_terrain(self, terrain):
        """Install one Heightfield for all envs or a per-env list."""
        E = self.num_envs
        if terrain is None:
            terrain = Heightfield()
        if isinstance(terrain, Heightfield):
            terrain = [terrain] * E
        if len(terrain) != E:
            raise ContractViolation(f"expected {E} heightfields, got {len(terrain)}")
        sizes = {hf.heights.size for hf in terrain}
        if len(sizes) != 1:
            raise ContractViolation("all heightfields must share one grid size")
        n = sizes.pop()
        self.terrain_x0 = float(terrain[0].x0)
        self.terrain_dx = float(terrain[0].dx)
        self.terrain_heights = np.zeros((E, n))
        for e, hf in enumerate(terrain):
            if n and (hf.x0 != self.terrain_x0 or hf.dx != self.terrain_dx):
                raise ContractViolation("all heightfields must share one grid origin/spacing")
            self.terrain_heights[e] = hf.heights

    def standing_state(self):
        """Nominal q for a robot standing at theta0 on flat ground."""
        q = np.zeros(NQ)
        q[1] = self.desc.standing_height()
        q[3:9] = self.desc.theta0
        return q

    def reset_envs(self, env_ids, q=None, qd=None):
        """Reset selected envs to a given state (default: nominal standing)."""
        env_ids = np.asarray(env_ids, dtype=np.int64)
        self.q[env_ids] = self.standing_state() if q is None else q
        self.qd[env_ids] = 0.0 if qd is None else qd
        self.last_target[env_ids] = self.desc.theta0
        self.diverged[env_ids] = -1

    def set_randomization(self, env_ids, friction=None, motor_scale=None,
                          payload=None, delay_ticks=None):
        env_ids = np.asarray(env_ids, dtype=np.int64)
        if friction is not None:
            self.friction[env_ids] = friction
        if motor_scale is not None:
            self.motor_scale[env_ids] = motor_scale
        if payload is not None:
            self.payload[env_ids] = payload
        if delay_ticks is not None:
            self.delay_ticks[env_ids] = delay_ticks

    # -- stepping -----------------------------------------------------------

    def _run_kernel(self, new_target, push, n_ticks, mode):
        E = self.num_envs
        out_tau = np.zeros((E, NUM_JOINTS))
        out_forces = np.zeros((E, 2))
        args = (
            self.params, self.q, self.qd, self.last_target, new_target,
            self.delay_ticks, self.motor_scale, self.friction, self.payload,
            push, self.terrain_heights, self.terrain_x0, self.terrain_dx,
            int(n_ticks), self._integrator, mode, int(self.fix_base),
            int(self.contact_enabled), self.tick_count, out_tau, out_forces,
            self.diverged,
        )
        if self.workers == 1 or E < 2 * self.workers:
            self._kernel.step_batch(*args, 0, E)
        else:
            bounds = np.linspace(0, E, self.workers + 1).astype(int)
            if self._pool is None:
                self._pool = ThreadPoolExecutor(max_workers=self.workers)
            futures = [
                self._pool.submit(self._kernel.step_batch, *args, lo, hi)
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            for f in futures:
                f.result()
        self.tick_count += int(n_ticks)
        flags = out_forces > self.world.contact_force_eps
        return StepResult(out_tau, out_forces, flags, self.diverged >= 0)

    def control_substep(self, theta_target, push=None, n_ticks=CONTROL_TICKS) -> StepResult:
        """One policy step: hold PD targets for n_ticks 1 kHz ticks.

        Honors the per-env action-delay buffer: the first ``delay_ticks``
        ticks keep servoing the previously issued targets.
        """
        theta_target = np.asarray(theta_target, dtype=np.float64)
        if theta_target.shape != (self.num_envs, NUM_JOINTS):
            raise ContractViolation(
                f"targets must be ({self.num_envs}, {NUM_JOINTS}), got {theta_target.shape}"
            )
        push = self._push_array(push)
        return self._run_kernel(theta_target, push, n_ticks, MODE_PD)

    def step_torques(self, torques, push=None, n_ticks=1,
                     raise_on_divergence: bool = True) -> StepResult:
        """Advance with raw joint torques (clamped to limits), bypassing PD."""
        torques = np.asarray(torques, dtype=np.float64)
        if torques.shape != (self.num_envs, NUM_JOINTS):
            raise ContractViolation(
                f"torques must be ({self.num_envs}, {NUM_JOINTS}), got {torques.shape}"
            )
        push = self._push_array(push)
        result = self._run_kernel(torques, push, n_ticks, MODE_DIRECT_TORQUE)
        if raise_on_divergence and result.diverged.any():
            tick = int(self.diverged[self.diverged >= 0].min())
            raise SimulationDiverged(tick)
        return result

    def _push_array(self, push):
        E = self.num_envs
        if push is None:
            return np.zeros((E, 2))
        if isinstance(push, ExternalDisturbance):
            arr = np.zeros((E, 2))
            arr[:, 0] = push.force[0]
            arr[:, 1] = push.torque[1]
            return arr
        push = np.asarray(push, dtype=np.float64)
        if push.shape != (E, 2):
            raise ContractViolation(f"push must be ({E}, 2) [fx, pitch torque]")
        return push

    # -- queries ------------------------------------------------------------

    @property
    def sim_time(self) -> float:
        return self.tick_count * TICK_DT

    @property
    def base_position(self):
        return self.q[:, 0:2]

    @property
    def base_pitch(self):
        return self.q[:, 2]

    @property
    def base_velocity(self):
        return self.qd[:, 0:2]

    @property
    def base_pitch_rate(self):
        return self.qd[:, 2]

    @property
    def joint_pos(self):
        return self.q[:, 3:9]

    @property
    def joint_vel(self):
        return self.qd[:, 3:9]

    def contact_forces(self) -> np.ndarray:
        """(E, 2) per-foot normal forces at the current state."""
        if not self.contact_enabled:
            return np.zeros((self.num_envs, 2))
        fn = _kernel_py.contact_normal_forces(
            self.params, self.q, self.qd, self.friction,
            self.terrain_heights, self.terrain_x0, self.terrain_dx,
        )
        return np.stack([fn[:, 0] + fn[:, 1], fn[:, 2] + fn[:, 3]], axis=-1)

    def contact_state(self, env: int = 0) -> ContactState:
        forces = self.contact_forces()[env]
        eps = self.world.contact_force_eps
        return ContactState(
            foot_force_left=float(forces[0]),
            foot_force_right=float(forces[1]),
            in_contact_left=bool(forces[0] > eps),
            in_contact_right=bool(forces[1] > eps),
        )

    def contact_gaps(self) -> np.ndarray:
        """(E, 4) per contact point height above local ground."""
        return _kernel_py.contact_point_heights(
            self.params, self.q, self.qd,
            self.terrain_heights, self.terrain_x0, self.terrain_dx,
        )

    def mechanical_energy(self) -> np.ndarray:
        return _kernel_py.mechanical_energy(self.params, self.q, self.qd, self.payload)

    def snapshot(self):
        return (self.q.copy(), self.qd.copy(), self.last_target.copy(), self.tick_count)

    def restore(self, snap):
        q, qd, lt, ticks = snap
        self.q[:] = q
        self.qd[:] = qd
        self.last_target[:] = lt
        self.tick_count = ticks
        self.diverged[:] = -1
