"""Strong errors from coarse and fine runs driven by one Brownian path.

Every level h and the reference run of a path consume the same fine
increments (see `BrownianLattice`), so their difference measures the
discretisation error alone. The reference is either the scheme itself at
`h_ref` or, for geometric Brownian motion, the exact solution.
"""

from dataclasses import dataclass
from enum import Enum
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from tamedlib.errors import ConfigurationError
from tamedlib.montecarlo.ensemble import InitialCondition, StatAccumulator, as_initial_condition, run_in_batches
from tamedlib.montecarlo.lattice import BrownianLattice
from tamedlib.montecarlo.rng import RngSpec
from tamedlib.scheme.config import SchemeConfig, System
from tamedlib.scheme.step import step_standard

logger = logging.getLogger(__name__)

DEFAULT_H_REF = 2.0**-14
# each path in a batch holds its n_fine × m fine increments
COUPLING_BATCH_SIZE = 256

SchemeFactory = Callable[[float], SchemeConfig]


class ErrorMetric(str, Enum):
    """Where the error is measured."""

    terminal = "terminal"
    sup = "sup"


class Reference(str, Enum):
    """What the levels are compared against."""

    fine = "fine"
    exact_gbm = "exact_gbm"


@dataclass(frozen=True)
class StrongErrorResult:
    """Root-mean-square errors per level.

    Attributes:
        levels: the step sizes, as given
        errors: {E|X̄^h − X^ref|²}^{1/2} per level
        standard_errors: delta-method standard errors of `errors`
        n_valid: paths where neither run diverged, per level
        metric: terminal or sup over the level's grid
        reference: fine-grid scheme run or exact GBM
        h_ref: fine step of the lattice
        n_paths: paths simulated
    """

    levels: Tuple[float, ...]
    errors: Tuple[float, ...]
    standard_errors: Tuple[float, ...]
    n_valid: Tuple[int, ...]
    metric: ErrorMetric
    reference: Reference
    h_ref: float
    n_paths: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "levels": list(self.levels),
            "errors": list(self.errors),
            "standard_errors": list(self.standard_errors),
            "n_valid": list(self.n_valid),
            "metric": self.metric.value,
            "reference": self.reference.value,
            "h_ref": self.h_ref,
            "n_paths": self.n_paths,
        }


def gbm_exact_terminal(x0: np.ndarray, mu: float, sigma: float, W_T: np.ndarray, T: float) -> np.ndarray:
    """Return x₀ exp((μ − σ²/2)T + σW_T).

    Examples:
        >>> float(gbm_exact_terminal(np.array(1.0), 0.5, 1.0, np.array(0.0), 2.0))
        1.0
    """
    return x0 * np.exp((mu - 0.5 * sigma**2) * T + sigma * W_T)


def _run(
    scheme: SchemeConfig, system: System, x0: np.ndarray, increments: np.ndarray, keep: bool
) -> Tuple[np.ndarray, np.ndarray]:
    """Return the states (terminal, or the whole grid if `keep`) and the divergence flags."""
    step = scheme.stepper(system)
    x = scheme.prepare_initial(x0.copy())
    cap = scheme.divergence_cap()
    n_steps = increments.shape[1]
    path = np.empty((x.shape[0], n_steps + 1, x.shape[1])) if keep else None
    diverged = np.zeros(x.shape[0], dtype=bool)
    if path is not None:
        path[:, 0] = x
    with np.errstate(all="ignore"):
        for k in range(n_steps):
            x = step(k * scheme.h, x, increments[:, k, :])
            diverged |= ~np.isfinite(x).all(axis=1) | (np.linalg.norm(x, axis=1) > cap)
            x[diverged] = np.nan
            if path is not None:
                path[:, k + 1] = x
    return (path if path is not None else x), diverged


def couple_strong_error(
    system: System,
    scheme_factory: SchemeFactory,
    x0: Union[InitialCondition, Sequence[float], np.ndarray],
    levels: Sequence[float],
    n_paths: int,
    rng: RngSpec,
    h_ref: float = DEFAULT_H_REF,
    metric: Union[ErrorMetric, str] = ErrorMetric.terminal,
    reference: Union[Reference, str] = Reference.fine,
    batch_size: int = COUPLING_BATCH_SIZE,
    workers: Optional[int] = None,
) -> StrongErrorResult:
    """Estimate the strong error of `scheme_factory(h)` for every h in `levels`.

    Args:
        system: the model, or tamed coefficients
        scheme_factory: builds the scheme at a given step size; its T is the horizon
        x0: initial condition
        levels: step sizes, each a dyadic multiple of `h_ref`
        n_paths: coupled paths
        rng: the master seed
        h_ref: fine step shared by every level
        metric: terminal error or sup over the level's grid
        reference: `fine` runs the scheme at h_ref; `exact_gbm` uses the exact GBM solution
        batch_size: paths per vectorised batch
        workers: threads running batches

    Raises:
        ConfigurationError: a level is not dyadic on the lattice, or the exact
            reference is requested for a model without GBM parameters
    """
    metric = ErrorMetric(metric)
    reference = Reference(reference)
    ref_scheme = scheme_factory(h_ref)
    lattice = BrownianLattice(ref_scheme.T, h_ref)
    factors = [lattice.factor(h) for h in levels]
    schemes = [scheme_factory(h) for h in levels]
    model = ref_scheme.model(system)
    initial = as_initial_condition(x0)
    m = model.dim_noise
    if reference is Reference.exact_gbm and not {"mu", "sigma"} <= set(model.params):
        raise ConfigurationError(f"exact_gbm reference needs a GBM model, got {model.name}")
    keep = metric is ErrorMetric.sup

    def reference_states(x_init: np.ndarray, fine: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if reference is Reference.fine:
            return _run(ref_scheme, system, x_init, fine, keep)
        mu, sigma = model.params["mu"], model.params["sigma"]
        w = lattice.brownian_path(fine)
        t = np.arange(lattice.n_fine + 1) * h_ref
        if keep:
            exact = gbm_exact_terminal(x_init[:, None, :], mu, sigma, w, t[None, :, None])
        else:
            exact = gbm_exact_terminal(x_init, mu, sigma, w[:, -1, :], lattice.T)
        return exact, np.zeros(x_init.shape[0], dtype=bool)

    def run_batch(paths: range) -> List[StatAccumulator]:
        fine = lattice.fine_increments(rng.batch_normals(paths, lattice.n_fine, m))
        x_init = initial.sample(rng, paths)
        ref, ref_diverged = reference_states(x_init, fine)
        accs = []
        for scheme, f in zip(schemes, factors):
            states, diverged = _run(scheme, system, x_init, lattice.coarsen(fine, scheme.h), keep)
            if keep:
                gaps = np.linalg.norm(states - ref[:, ::f, :], axis=2).max(axis=1)
            else:
                gaps = np.linalg.norm(states - ref, axis=1)
            sq = np.where(diverged | ref_diverged, np.nan, gaps**2)
            acc = StatAccumulator.empty(1)
            acc.record(0, sq)
            accs.append(acc)
        return accs

    batches = run_in_batches(run_batch, n_paths, batch_size, workers)
    merged = [StatAccumulator.empty(1) for _ in levels]
    for batch in batches:
        for acc, part in zip(merged, batch):
            acc.merge(part)
    errors, ses, valid = [], [], []
    for acc in merged:
        n = int(acc.n[0])
        mean_sq = float(acc.mean[0]) if n else math.nan
        rmse = math.sqrt(mean_sq) if n else math.nan
        se_sq = math.sqrt(float(acc.m2[0]) / (n - 1) / n) if n > 1 else 0.0
        errors.append(rmse)
        ses.append(se_sq / (2.0 * rmse) if rmse > 0 else 0.0)
        valid.append(n)
    result = StrongErrorResult(
        levels=tuple(float(h) for h in levels),
        errors=tuple(errors),
        standard_errors=tuple(ses),
        n_valid=tuple(valid),
        metric=metric,
        reference=reference,
        h_ref=h_ref,
        n_paths=n_paths,
    )
    for h, err, n in zip(result.levels, result.errors, result.n_valid):
        logger.info("strong error at h=%g: %.6g (%d valid paths)", h, err, n)
    return result


@dataclass(frozen=True)
class OneStepDifference:
    """One-step gap between a scheme and the standard Euler step from a fixed x.

    Attributes:
        hs: the step sizes
        l2: ‖X̄(h) − X̃(h)‖_{L²} per h
        mean_gap: |E X̄(h) − E X̃(h)| per h
        l2_exponent: fitted exponent of `l2` in h, when two or more values are positive
        mean_exponent: fitted exponent of `mean_gap` in h, likewise
    """

    hs: Tuple[float, ...]
    l2: Tuple[float, ...]
    mean_gap: Tuple[float, ...]
    l2_exponent: Optional[float]
    mean_exponent: Optional[float]


def _exponent(hs: Sequence[float], values: Sequence[float]) -> Optional[float]:
    pairs = [(h, v) for h, v in zip(hs, values) if v > 0]
    if len(pairs) < 2:
        return None
    fit = stats.linregress(np.log([h for h, _ in pairs]), np.log([v for _, v in pairs]))
    return float(fit.slope)


def estimate_one_step_difference(
    system: System,
    scheme_factory: SchemeFactory,
    x: Sequence[float],
    hs: Sequence[float],
    n_samples: int,
    rng: RngSpec,
) -> OneStepDifference:
    """Compare one step of `scheme_factory(h)` with the standard Euler step, both from x.

    The two steps share their Brownian increments; the same normals are
    reused at every h.
    """
    point = np.tile(np.asarray(x, dtype=float), (n_samples, 1))
    first = scheme_factory(hs[0])
    model = first.model(system)
    normals = rng.batch_normals(range(n_samples), 1, model.dim_noise)[:, 0, :]
    l2, gaps = [], []
    for h in hs:
        scheme = scheme_factory(h)
        dW = math.sqrt(h) * normals
        ours = scheme.stepper(system)(0.0, scheme.prepare_initial(point), dW)
        euler = step_standard(model, 0.0, point, dW, h)
        diff = ours - euler
        l2.append(float(np.sqrt(np.mean(np.einsum("ni,ni->n", diff, diff)))))
        gaps.append(float(np.linalg.norm(np.mean(diff, axis=0))))
    return OneStepDifference(
        hs=tuple(float(h) for h in hs),
        l2=tuple(l2),
        mean_gap=tuple(gaps),
        l2_exponent=_exponent(hs, l2),
        mean_exponent=_exponent(hs, gaps),
    )
