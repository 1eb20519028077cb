"""Per-path random streams.

Path i draws from `PCG64(SeedSequence(master_seed, spawn_key=(i,)))`: per
step, m standard normals in component order. Initial states come from the
separate substream `(i, 1)`. A path's draws depend only on the master seed
and its index, never on how paths are split into batches or workers.

Examples:
    >>> spec = RngSpec(7)
    >>> bool((spec.normals(3, 5, 2) == spec.batch_normals([2, 3], 5, 2)[1]).all())
    True

"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tamedlib.errors import ConfigurationError


@dataclass(frozen=True)
class RngSpec:
    """A master seed and the substream layout derived from it.

    Attributes:
        master_seed: non-negative, below 2**64
    """

    master_seed: int

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ConfigurationError(f"master seed must lie in [0, 2^64): {self.master_seed}")

    def generator(self, path_index: int) -> np.random.Generator:
        """Return the increment generator of path `path_index`."""
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.master_seed, spawn_key=(path_index,))))

    def initial_generator(self, path_index: int) -> np.random.Generator:
        """Return the generator for the initial state of path `path_index`."""
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.master_seed, spawn_key=(path_index, 1)))
        )

    def normals(self, path_index: int, n_steps: int, dim_noise: int) -> np.ndarray:
        """Return the `(n_steps, dim_noise)` standard normals of one path."""
        return self.generator(path_index).standard_normal((n_steps, dim_noise))

    def batch_normals(self, path_indices: Sequence[int], n_steps: int, dim_noise: int) -> np.ndarray:
        """Return `(len(path_indices), n_steps, dim_noise)` normals, path by path."""
        out = np.empty((len(path_indices), n_steps, dim_noise))
        for row, index in enumerate(path_indices):
            out[row] = self.normals(index, n_steps, dim_noise)
        return out
