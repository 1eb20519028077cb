"""Truncation of the Gaussian driver at A_h = √(2|log h|).

For d > 1 the clamp is applied componentwise.

Examples:
    >>> import numpy as np
    >>> truncate_noise(np.array([3.0, 0.5, -3.0]), np.exp(-2.0))
    array([ 2. ,  0.5, -2. ])

"""

from dataclasses import dataclass
import math

import numpy as np

from tamedlib.errors import ConfigurationError


def truncation_level(h: float) -> float:
    """Return A_h = √(2|log h|) for h ∈ (0, 1).

    Raises:
        ConfigurationError: h = 1 makes A_h = 0 and kills the noise
    """
    if not 0 < h < 1:
        raise ConfigurationError(f"noise truncation needs h ∈ (0,1): h={h}")
    return math.sqrt(2.0 * abs(math.log(h)))


def truncate_noise(xi: np.ndarray, h: float) -> np.ndarray:
    """Return ζ_h: `xi` clamped componentwise to [−A_h, A_h]."""
    level = truncation_level(h)
    return np.clip(np.asarray(xi, dtype=float), -level, level)


@dataclass(frozen=True)
class NoiseTruncation:
    """Truncation settings at step size `h`.

    Attributes:
        h: the step size the level derives from
        enabled: apply the clamp
    """

    h: float
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.enabled:
            truncation_level(self.h)

    @property
    def a_h(self) -> float:
        """Return the truncation level, or infinity when disabled."""
        return truncation_level(self.h) if self.enabled else math.inf

    def apply(self, xi: np.ndarray) -> np.ndarray:
        return truncate_noise(xi, self.h) if self.enabled else np.asarray(xi, dtype=float)
