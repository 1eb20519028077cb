"""Deterministic sample clouds for the sampled ∀x checks.

The conditions the library verifies hold for all x; they are checked on a
cloud of points uniform in a ball, plus a small cloud around the origin
where stability conditions are most delicate.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from tamedlib.errors import ConfigurationError


def uniform_in_ball(rng: np.random.Generator, n: int, dim: int, radius: float) -> np.ndarray:
    """Return `n` points uniform in the closed ball of `radius` in R^dim."""
    directions = rng.standard_normal((n, dim))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = radius * rng.random((n, 1)) ** (1.0 / dim)
    return directions / norms * radii


@dataclass(frozen=True)
class SampleSpec:
    """How to draw the points a sampled check runs on.

    Attributes:
        n: points uniform in the ball of `radius`
        radius: outer radius, clipped to the projection radius when one is given
        n_origin: points uniform in the ball of `origin_radius`
        origin_radius: radius of the cloud around the origin
        seed: seed of the sample stream
        include_boundary: also add `n_origin` points on the outer sphere
    """

    n: int = 10_000
    radius: float = 10.0
    n_origin: int = 100
    origin_radius: float = 1e-3
    seed: int = 20240101
    include_boundary: bool = True

    def __post_init__(self) -> None:
        if self.n < 1 or self.radius <= 0:
            raise ConfigurationError(f"sample spec needs n ≥ 1 and radius > 0: n={self.n}, radius={self.radius}")

    def points(self, dim: int, max_radius: Optional[float] = None) -> np.ndarray:
        """Return the sample cloud in R^dim as an `(n_total, dim)` array."""
        radius = self.radius if max_radius is None else min(self.radius, max_radius)
        rng = np.random.default_rng(self.seed)
        parts = [uniform_in_ball(rng, self.n, dim, radius)]
        if self.n_origin:
            parts.append(uniform_in_ball(rng, self.n_origin, dim, min(self.origin_radius, radius)))
            if self.include_boundary:
                sphere = rng.standard_normal((self.n_origin, dim))
                sphere /= np.maximum(np.linalg.norm(sphere, axis=1, keepdims=True), 1e-300)
                # scaled inward so rounding keeps the points inside the ball
                parts.append(sphere * radius * (1.0 - 1e-12))
        return np.concatenate(parts, axis=0)

    def pairs(self, dim: int, max_radius: Optional[float] = None) -> "tuple[np.ndarray, np.ndarray]":
        """Return two independent clouds of the same size, for pairwise checks."""
        x = self.points(dim, max_radius)
        y = np.random.default_rng(self.seed + 1).permutation(x, axis=0)
        return x, y
