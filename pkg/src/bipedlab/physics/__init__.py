"""Physics backends for the planar biped.

Two integration backends share one dynamics model:

* ``fast``      - semi-implicit Euler at the 1 kHz tick rate (training).
* ``reference`` - classic RK4 at 4 kHz, resampled to the 1 kHz interface
                  (slower, more accurate; the sim-to-sim counterpart).

The inner tick loop has two interchangeable implementations: a compiled
Cython kernel and a pure-numpy fallback. The compiled one is picked at
import time when available; set ``BIPEDLAB_PURE_PYTHON=1`` to force the
fallback. ``benchmarks/bench_physics.py`` compares the two.
"""

import os

from bipedlab.physics import _kernel_py

if os.environ.get("BIPEDLAB_PURE_PYTHON", "") not in ("", "0"):
    _active_kernel = _kernel_py
else:
    try:
        from bipedlab.physics import _kernel as _active_kernel  # type: ignore
    except ImportError:
        _active_kernel = _kernel_py

COMPILED_KERNEL_ACTIVE = bool(getattr(_active_kernel, "COMPILED", False))

from bipedlab.physics.engine import (  # noqa: E402
    BACKENDS,
    PhysicsEngine,
    StepResult,
    WorldParams,
)

__all__ = [
    "BACKENDS",
    "COMPILED_KERNEL_ACTIVE",
    "PhysicsEngine",
    "StepResult",
    "WorldParams",
]


def active_kernel():
    """Module implementing the tick loop (compiled extension or numpy)."""
    return _active_kernel
