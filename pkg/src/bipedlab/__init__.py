"""Planar bipedal locomotion RL lab.

Training pipeline: PPO with a privileged critic, gait-phase rewards and
domain randomization on a planar articulated biped, plus a sim-to-sim
validation harness running the same policy under two independent physics
backends (fast semi-implicit Euler and a reference RK4 integrator).
"""

__version__ = "0.1.0"

from bipedlab.errors import (
    BipedLabError,
    CheckpointError,
    ConfigError,
    ContractViolation,
    SimulationDiverged,
)

__all__ = [
    "BipedLabError",
    "CheckpointError",
    "ConfigError",
    "ContractViolation",
    "SimulationDiverged",
    "__version__",
]
