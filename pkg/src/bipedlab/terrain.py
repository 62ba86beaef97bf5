"""Ground height models: flat plane and seeded value-noise heightfields."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from bipedlab.errors import ConfigError

TERRAIN_KINDS = ("flat", "uneven")


@dataclass
class Heightfield:
    """1-D heightfield h(x) with cosine interpolation between grid knots.

    An empty ``heights`` array means flat ground (h = 0 everywhere).
    Queries outside [x0, x0 + dx*(n-1)] clamp to the edge values.
    """

    x0: float = 0.0
    dx: float = 1.0
    heights: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.heights = np.asarray(self.heights, dtype=np.float64)

    @property
    def is_flat(self) -> bool:
        return self.heights.size == 0

    def _locate(self, x):
        u = (np.asarray(x, dtype=np.float64) - self.x0) / self.dx
        i = np.clip(np.floor(u).astype(np.int64), 0, self.heights.size - 2)
        s = np.clip(u - i, 0.0, 1.0)
        return i, s

    def height(self, x):
        """Ground height at x (broadcasts)."""
        if self.is_flat:
            return np.zeros_like(np.asarray(x, dtype=np.float64))
        i, s = self._locate(x)
        w = 0.5 * (1.0 - np.cos(np.pi * s))
        return self.heights[i] * (1.0 - w) + self.heights[i + 1] * w

    def slope(self, x):
        """dh/dx at x (zero on flat ground and beyond the grid edges)."""
        if self.is_flat:
            return np.zeros_like(np.asarray(x, dtype=np.float64))
        i, s = self._locate(x)
        return (self.heights[i + 1] - self.heights[i]) * (np.pi / (2.0 * self.dx)) * np.sin(np.pi * s)


def make_terrain(
    kind: str,
    seed: int,
    amplitude: float = 0.03,
    correlation: float = 0.3,
    x_min: float = -12.0,
    x_max: float = 42.0,
) -> Heightfield:
    """Build a terrain of the given kind.

    flat: h(x) = 0. uneven: value noise with knots every ``correlation``
    meters, heights uniform in [-amplitude, amplitude]; the cosine
    interpolation never overshoots the knot values, so |h| <= amplitude.
    """
    if kind == "flat":
        return Heightfield()
    if kind != "uneven":
        raise ConfigError(f"unknown terrain kind '{kind}' (expected one of {TERRAIN_KINDS})")
    n = int(np.ceil((x_max - x_min) / correlation)) + 1
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x7E44)))
    heights = rng.uniform(-amplitude, amplitude, size=n)
    return Heightfield(x0=x_min, dx=correlation, heights=heights)
