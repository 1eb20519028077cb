"""Nested Brownian grids for coupled coarse/fine simulation.

A `BrownianLattice` holds fine increments at step `h_ref`; the increment
over a coarse step of size h = 2^j·h_ref is the sum of its 2^j fine
sub-increments, added strictly left to right.

Examples:
    >>> lattice = BrownianLattice(T=1.0, h_ref=0.25)
    >>> lattice.factor(0.5)
    2
    >>> import numpy as np
    >>> fine = np.arange(4.0).reshape(1, 4, 1)
    >>> lattice.coarsen(fine, 0.5)[0, :, 0]
    array([1., 5.])

"""

from dataclasses import dataclass
import math

import numpy as np

from tamedlib.errors import ConfigurationError

# ratios closer than this to an integer count as integral
_GRID_TOLERANCE = 1e-9


def _integral(value: float) -> int:
    nearest = round(value)
    if nearest < 1 or abs(value - nearest) > _GRID_TOLERANCE * max(1.0, value):
        return 0
    return int(nearest)


@dataclass(frozen=True)
class BrownianLattice:
    """A fine grid on [0, T].

    Attributes:
        T: horizon
        h_ref: fine step; T/h_ref must be an integer

    Raises:
        ConfigurationError: T/h_ref is not a positive integer
    """

    T: float
    h_ref: float

    def __post_init__(self) -> None:
        if not (self.T > 0 and 0 < self.h_ref <= 1):
            raise ConfigurationError(f"lattice needs T > 0 and h_ref ∈ (0,1]: T={self.T}, h_ref={self.h_ref}")
        if not _integral(self.T / self.h_ref):
            raise ConfigurationError(f"T/h_ref must be an integer: T={self.T}, h_ref={self.h_ref}")

    @property
    def n_fine(self) -> int:
        return _integral(self.T / self.h_ref)

    def factor(self, h: float) -> int:
        """Return h/h_ref, a power of two dividing the fine step count.

        Raises:
            ConfigurationError: h is not a dyadic multiple of h_ref on this grid
        """
        ratio = _integral(h / self.h_ref)
        if not ratio or ratio & (ratio - 1) or self.n_fine % ratio:
            raise ConfigurationError(f"level h={h} is not a dyadic multiple of h_ref={self.h_ref} on [0, {self.T}]")
        return ratio

    def n_steps(self, h: float) -> int:
        return self.n_fine // self.factor(h)

    def fine_increments(self, normals: np.ndarray) -> np.ndarray:
        """Return √h_ref times `normals` of shape `(n, n_fine, m)`."""
        assert normals.shape[1] == self.n_fine, f"expected {self.n_fine} fine steps, got {normals.shape[1]}"
        return math.sqrt(self.h_ref) * normals

    def coarsen(self, fine: np.ndarray, h: float) -> np.ndarray:
        """Return the `(n, n_fine/f, m)` increments at step h, f = h/h_ref."""
        f = self.factor(h)
        if f == 1:
            return fine
        blocks = fine.reshape(fine.shape[0], self.n_fine // f, f, fine.shape[2])
        total = blocks[:, :, 0, :].copy()
        for j in range(1, f):
            total += blocks[:, :, j, :]
        return total

    def brownian_path(self, fine: np.ndarray) -> np.ndarray:
        """Return W at the fine grid times, `(n, n_fine + 1, m)`, starting at 0."""
        out = np.zeros((fine.shape[0], self.n_fine + 1, fine.shape[2]))
        np.cumsum(fine, axis=1, out=out[:, 1:, :])
        return out
