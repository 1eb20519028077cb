"""Projection onto the ball of radius h^{−r}.

Variants:

* radial: Πx = min{1, h^{−r}/|x|}·x
* componentwise: each xᵢ clamped to [−h^{−r}/√d, h^{−r}/√d]
* nonnegative: each xᵢ clamped to [0, h^{−r}/√d]

The componentwise variants clamp at h^{−r}/√d, so they are idempotent and
leave every x with |xᵢ| ≤ h^{−r}/√d unchanged. For d > 1 the clamp level
is lowered by a few ulps so that rounding in |Πx| never exceeds h^{−r}.

Examples:
    >>> import numpy as np
    >>> ProjectionConfig(r=0.5).project(np.array([[15.0, 0.0]]), 0.01)
    array([[10.,  0.]])

"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from tamedlib.errors import ConfigurationError

_SHRINK = 1.0 - 4.0 * np.finfo(float).eps


class ProjectionVariant(str, Enum):
    """Shapes of the projection."""

    radial = "radial"
    componentwise = "componentwise"
    nonnegative = "nonnegative"


@dataclass(frozen=True)
class ProjectionConfig:
    """Projection exponent and variant.

    Attributes:
        r: the exponent; the radius is h^{−r}
        variant: radial by default
    """

    r: float
    variant: ProjectionVariant = ProjectionVariant.radial

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise ConfigurationError(f"projection exponent r > 0 violated: r={self.r}")

    def radius(self, h: float) -> float:
        """Return h^{−r}."""
        return float(h ** (-self.r))

    def _clamp_level(self, h: float, dim: int) -> float:
        if dim == 1:
            return self.radius(h)
        return self.radius(h) / np.sqrt(dim) * _SHRINK

    def project(self, x: np.ndarray, h: float) -> np.ndarray:
        """Return Πx for a batch `x` of shape `(n, d)`."""
        if self.variant is ProjectionVariant.radial:
            return _radial(x, self.radius(h))
        level = self._clamp_level(h, x.shape[1])
        low = 0.0 if self.variant is ProjectionVariant.nonnegative else -level
        return np.clip(x, low, level)

    def contains(self, x: np.ndarray, h: float) -> bool:
        """Return True if every row of `x` lies in the closed ball of radius h^{−r}."""
        return bool(np.all(np.linalg.norm(x, axis=1) <= self.radius(h)))


def _radial(x: np.ndarray, radius: float) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1)
    outside = norms > radius
    if not outside.any():
        return x
    out = x.copy()
    out[outside] = x[outside] * (radius / norms[outside])[:, None]
    # rounding can leave the scaled point a few ulps outside
    for _ in range(8):
        over = np.linalg.norm(out, axis=1) > radius
        if not over.any():
            break
        out[over] *= np.nextafter(1.0, 0.0)
    return out
