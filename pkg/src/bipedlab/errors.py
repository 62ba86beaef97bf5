"""Exception types shared across the package."""


class BipedLabError(Exception):
    """Base class for all package errors."""


class ConfigError(BipedLabError):
    """Invalid configuration file, key, or value."""


class ContractViolation(BipedLabError):
    """An API was called with arguments that violate its contract."""


class SimulationDiverged(BipedLabError):
    """The integrator produced non-finite state.

    Attributes:
        tick: global 1 kHz tick index at which divergence was detected.
    """

    def __init__(self, tick: int, message: str = ""):
        self.tick = int(tick)
        super().__init__(message or f"simulation diverged at tick {self.tick}")


class CheckpointError(BipedLabError):
    """Checkpoint file is missing, malformed, or dimensionally incompatible."""
