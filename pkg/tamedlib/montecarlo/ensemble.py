"""Ensemble simulation of a scheme over many independent paths.

Paths are split into fixed-size batches that advance in one vectorised
step. Batches may run on several worker threads; their statistics are
merged in batch order, so every number an ensemble reports depends only on
the seed and the batch size, never on the worker count.

A path diverges when a component becomes non-finite or, for schemes
without projection, when |x| exceeds 1e12. It is recorded with the first
divergence index and frozen at NaN; divergence is never an exception.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

from tamedlib.core.lyapunov import LyapunovSpec
from tamedlib.core.sampling import uniform_in_ball
from tamedlib.errors import ConfigurationError
from tamedlib.montecarlo.rng import RngSpec
from tamedlib.scheme.config import SchemeConfig, System

logger = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 1024

R = TypeVar("R")


class InitialKind(str, Enum):
    """Initial distributions."""

    point = "point"
    uniform = "uniform"
    gaussian = "gaussian"


@dataclass(frozen=True)
class InitialCondition:
    """Law of X₀.

    Attributes:
        kind: point mass, uniform in a ball, or Gaussian
        center: the point, or the center of the ball or Gaussian
        spread: ball radius or Gaussian standard deviation
    """

    kind: InitialKind
    center: Tuple[float, ...]
    spread: float = 0.0

    def __post_init__(self) -> None:
        if self.kind is not InitialKind.point and not self.spread > 0:
            raise ConfigurationError(f"{self.kind.value} initial condition needs spread > 0")

    @classmethod
    def point(cls, *coords: float) -> "InitialCondition":
        return cls(InitialKind.point, tuple(float(c) for c in coords))

    @property
    def dim(self) -> int:
        return len(self.center)

    def sample(self, rng: RngSpec, path_indices: Sequence[int]) -> np.ndarray:
        """Return `(len(path_indices), d)` initial states from the per-path initial substreams."""
        center = np.asarray(self.center, dtype=float)
        out = np.tile(center, (len(path_indices), 1))
        if self.kind is InitialKind.point:
            return out
        for row, index in enumerate(path_indices):
            gen = rng.initial_generator(index)
            if self.kind is InitialKind.uniform:
                out[row] += uniform_in_ball(gen, 1, self.dim, self.spread)[0]
            else:
                out[row] += self.spread * gen.standard_normal(self.dim)
        return out


class Aggregation(str, Enum):
    """How per-path values of a functional combine into one number per step."""

    mean = "mean"
    max = "max"
    count = "count"


@dataclass(frozen=True)
class Functional:
    """A per-step statistic of the ensemble.

    Mean and max run over the paths that have not diverged; count sums
    over all paths.

    Attributes:
        name: the statistic name in traces and reports
        evaluate: x[n, d] -> [n]
        aggregation: how the per-path values combine
    """

    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    aggregation: Aggregation = Aggregation.mean

    @classmethod
    def mean_v(cls, lyap: LyapunovSpec) -> "Functional":
        return cls("mean_V", lyap.value)

    @classmethod
    def mean_square_norm(cls) -> "Functional":
        return cls("mean_sq_norm", lambda x: np.einsum("ni,ni->n", x, x))

    @classmethod
    def max_norm(cls) -> "Functional":
        return cls("max_norm", lambda x: np.linalg.norm(x, axis=1), Aggregation.max)

    @classmethod
    def negative_count(cls) -> "Functional":
        """Count paths with a negative component at each step."""
        return cls("negative_count", lambda x: np.any(x < 0, axis=1).astype(float), Aggregation.count)

    @classmethod
    def abs_moment(cls, p: float) -> "Functional":
        return cls(f"abs_moment_{p:g}", lambda x: np.linalg.norm(x, axis=1) ** p)


@dataclass
class StatAccumulator:
    """Per-step running statistics of one functional over a set of paths."""

    n: np.ndarray
    mean: np.ndarray
    m2: np.ndarray
    maximum: np.ndarray
    count: np.ndarray

    @classmethod
    def empty(cls, n_points: int) -> "StatAccumulator":
        return cls(
            n=np.zeros(n_points),
            mean=np.zeros(n_points),
            m2=np.zeros(n_points),
            maximum=np.full(n_points, -np.inf),
            count=np.zeros(n_points),
        )

    def record(self, k: int, values: np.ndarray) -> None:
        finite = values[np.isfinite(values)]
        self.count[k] = float(np.sum(finite))
        if finite.size:
            self.n[k] = finite.size
            self.mean[k] = float(np.mean(finite))
            self.m2[k] = float(np.sum((finite - self.mean[k]) ** 2))
            self.maximum[k] = float(np.max(finite))

    def merge(self, other: "StatAccumulator") -> None:
        """Fold `other` into self with the pairwise mean/M2 update."""
        n = self.n + other.n
        safe = np.where(n > 0, n, 1.0)
        delta = other.mean - self.mean
        self.mean = np.where(n > 0, self.mean + delta * other.n / safe, 0.0)
        self.m2 = self.m2 + other.m2 + delta**2 * self.n * other.n / safe
        self.n = n
        self.maximum = np.maximum(self.maximum, other.maximum)
        self.count = self.count + other.count


@dataclass(frozen=True)
class FunctionalTrace:
    """A functional along the time grid.

    Attributes:
        name: the functional
        aggregation: how it was aggregated
        value: one number per grid time
        standard_error: for means, √(sample variance / n); zero otherwise
        n_valid: paths contributing at each time
    """

    name: str
    aggregation: Aggregation
    value: np.ndarray
    standard_error: np.ndarray
    n_valid: np.ndarray

    @classmethod
    def from_accumulator(cls, functional: Functional, acc: StatAccumulator) -> "FunctionalTrace":
        if functional.aggregation is Aggregation.mean:
            value = np.where(acc.n > 0, acc.mean, np.nan)
            var = np.where(acc.n > 1, acc.m2 / np.maximum(acc.n - 1, 1), 0.0)
            se = np.sqrt(var / np.maximum(acc.n, 1))
        elif functional.aggregation is Aggregation.max:
            value = np.where(acc.n > 0, acc.maximum, np.nan)
            se = np.zeros_like(value)
        else:
            value = acc.count.copy()
            se = np.zeros_like(value)
        return cls(functional.name, functional.aggregation, value, se, acc.n.astype(int))


@dataclass(frozen=True)
class PathEnsemble:
    """The outcome of `simulate_ensemble`.

    Attributes:
        times: grid t_k = kh, length ⌊T/h⌋ + 1
        terminal: `(n_paths, d)` final states, NaN for diverged paths
        diverged: `(n_paths,)` flags
        divergence_index: first step at which a path diverged, −1 if never
        traces: per-step functionals by name
        initial: `(n_paths, d)` initial states after any pre-projection
        trajectories: `(n_paths, K + 1, d)` when requested
        h: the step size
    """

    times: np.ndarray
    terminal: np.ndarray
    diverged: np.ndarray
    divergence_index: np.ndarray
    traces: Dict[str, FunctionalTrace]
    initial: np.ndarray
    trajectories: Optional[np.ndarray] = None
    h: float = 0.0

    @property
    def n_paths(self) -> int:
        return int(self.terminal.shape[0])

    @property
    def n_diverged(self) -> int:
        return int(self.diverged.sum())

    @property
    def divergence_fraction(self) -> float:
        return self.n_diverged / self.n_paths

    def trace(self, name: str) -> FunctionalTrace:
        if name not in self.traces:
            raise ConfigurationError(f"ensemble has no functional {name!r}; recorded: {sorted(self.traces)}")
        return self.traces[name]


@dataclass
class _BatchResult:
    terminal: np.ndarray
    initial: np.ndarray
    divergence_index: np.ndarray
    accumulators: List[StatAccumulator]
    trajectories: Optional[np.ndarray]


def as_initial_condition(x0: Union[InitialCondition, Sequence[float], np.ndarray]) -> InitialCondition:
    if isinstance(x0, InitialCondition):
        return x0
    return InitialCondition.point(*np.atleast_1d(np.asarray(x0, dtype=float)).tolist())


def batch_ranges(n_paths: int, batch_size: int) -> List[range]:
    """Return the fixed partition of path indices into batches."""
    return [range(start, min(start + batch_size, n_paths)) for start in range(0, n_paths, batch_size)]


def run_in_batches(
    work: Callable[[range], R], n_paths: int, batch_size: int, workers: Optional[int]
) -> List[R]:
    """Run `work` on every batch and return the results in batch order."""
    batches = batch_ranges(n_paths, batch_size)
    n_workers = max(1, int(workers or 1))
    if n_workers == 1 or len(batches) == 1:
        return [work(batch) for batch in batches]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(work, batches))


def simulate_ensemble(
    system: System,
    scheme: SchemeConfig,
    x0: Union[InitialCondition, Sequence[float], np.ndarray],
    n_paths: int,
    rng: RngSpec,
    functionals: Sequence[Functional] = (),
    batch_size: int = DEFAULT_BATCH_SIZE,
    workers: Optional[int] = None,
    keep_trajectories: bool = False,
) -> PathEnsemble:
    """Simulate `n_paths` paths of `scheme` applied to `system`.

    Args:
        system: a model, or tamed coefficients for the tamed kinds
        scheme: kind, step size, horizon and kind-specific parts
        x0: an `InitialCondition` or a point
        n_paths: number of paths, at least 1
        rng: the master seed; path i uses substream i
        functionals: statistics recorded at every grid time
        batch_size: paths per vectorised batch; part of the reproducibility key
        workers: threads running batches; results do not depend on it
        keep_trajectories: also return every state of every path

    Returns:
        The ensemble with its functional traces.
    """
    if n_paths < 1:
        raise ConfigurationError(f"n_paths ≥ 1 violated: n_paths={n_paths}")
    initial = as_initial_condition(x0)
    model = scheme.model(system)
    if initial.dim != model.dim_state:
        raise ConfigurationError(f"x0 has {initial.dim} components, {model.name} has d={model.dim_state}")
    stepper = scheme.stepper(system)
    n_steps, h, m = scheme.n_steps, scheme.h, model.dim_noise
    cap = scheme.divergence_cap()
    sqrt_h = math.sqrt(h)

    def run_batch(paths: range) -> _BatchResult:
        x = scheme.prepare_initial(initial.sample(rng, paths))
        start = x.copy()
        dW = sqrt_h * rng.batch_normals(paths, n_steps, m)
        accs = [StatAccumulator.empty(n_steps + 1) for _ in functionals]
        div_index = np.full(len(paths), -1, dtype=int)
        traj = np.empty((len(paths), n_steps + 1, x.shape[1])) if keep_trajectories else None

        def record(k: int, state: np.ndarray) -> None:
            for acc, functional in zip(accs, functionals):
                acc.record(k, np.asarray(functional.evaluate(state), dtype=float))
            if traj is not None:
                traj[:, k, :] = state

        record(0, x)
        with np.errstate(all="ignore"):
            for k in range(n_steps):
                x = stepper(k * h, x, dW[:, k, :])
                alive = div_index < 0
                bad = alive & (~np.isfinite(x).all(axis=1) | (np.linalg.norm(x, axis=1) > cap))
                if bad.any():
                    div_index[bad] = k + 1
                x[div_index >= 0] = np.nan
                record(k + 1, x)
        logger.debug("batch %d-%d done", paths.start, paths.stop - 1)
        return _BatchResult(x, start, div_index, accs, traj)

    results = run_in_batches(run_batch, n_paths, batch_size, workers)
    merged = [StatAccumulator.empty(n_steps + 1) for _ in functionals]
    for result in results:
        for acc, part in zip(merged, result.accumulators):
            acc.merge(part)
    divergence_index = np.concatenate([r.divergence_index for r in results])
    trajectories: Optional[np.ndarray] = None
    if keep_trajectories:
        trajectories = np.concatenate([r.trajectories for r in results if r.trajectories is not None])
    ensemble = PathEnsemble(
        times=scheme.times(),
        terminal=np.concatenate([r.terminal for r in results]),
        diverged=divergence_index >= 0,
        divergence_index=divergence_index,
        traces={f.name: FunctionalTrace.from_accumulator(f, acc) for f, acc in zip(functionals, merged)},
        initial=np.concatenate([r.initial for r in results]),
        trajectories=trajectories,
        h=h,
    )
    logger.info(
        "ensemble %s/%s: %d paths × %d steps, h=%g, %d diverged",
        model.name,
        scheme.kind.value,
        n_paths,
        n_steps,
        h,
        ensemble.n_diverged,
    )
    return ensemble
