"""Estimators that turn ensembles into verdicts.

Examples:
    >>> import numpy as np
    >>> t = np.linspace(0.0, 5.0, 101)
    >>> fit = fit_exponential_rate(t, np.exp(-2.0 * t))
    >>> round(fit.slope, 12)
    -2.0

"""

from dataclasses import dataclass
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from tamedlib.analysis.report import ExperimentReport, FitResult, trace_rows
from tamedlib.errors import EstimationError
from tamedlib.montecarlo.coupling import StrongErrorResult
from tamedlib.montecarlo.ensemble import PathEnsemble

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = (0.2, 1.0)
MIN_FIT_POINTS = 4


def _linear_fit(
    x: np.ndarray, y: np.ndarray, confidence: float, shortened: bool = False, excluded: Tuple[float, ...] = ()
) -> FitResult:
    if x.size < MIN_FIT_POINTS:
        raise EstimationError(f"need at least {MIN_FIT_POINTS} usable points for a fit, got {x.size}")
    fit = stats.linregress(x, y)
    dof = x.size - 2
    half_width = float(stats.t.ppf(0.5 + confidence / 2.0, dof) * fit.stderr)
    residuals = y - (fit.intercept + fit.slope * x)
    return FitResult(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue**2),
        half_width=half_width,
        window=(float(x[0]), float(x[-1])),
        n_points=int(x.size),
        residual_std=float(np.std(residuals, ddof=min(2, x.size - 1))),
        shortened=shortened,
        excluded=excluded,
    )


def fit_exponential_rate(
    times: np.ndarray,
    values: np.ndarray,
    window: Tuple[float, float] = DEFAULT_WINDOW,
    confidence: float = 0.95,
) -> FitResult:
    """Fit log(values) against times on a window given as fractions of the horizon.

    The window [0.2T, T] skips the initial transient by default. If a value
    in the window is non-positive or not finite, the window ends just
    before it and the fit is flagged as shortened.

    Raises:
        EstimationError: fewer than four usable points remain
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    horizon = t[-1]
    inside = (t >= window[0] * horizon - 1e-12) & (t <= window[1] * horizon + 1e-12)
    t, v = t[inside], v[inside]
    bad = ~(np.isfinite(v) & (v > 0))
    shortened = bool(bad.any())
    if shortened:
        cut = int(np.argmax(bad))
        logger.warning("rate window shortened at t=%g: non-positive mean", t[cut])
        t, v = t[:cut], v[:cut]
    return _linear_fit(t, np.log(v), confidence, shortened)


def check_exponential_stability(
    ensemble: PathEnsemble,
    trace: str = "mean_V",
    rho: Optional[float] = None,
    min_fraction_of_rho: float = 0.4,
    max_slope: Optional[float] = None,
    window: Tuple[float, float] = DEFAULT_WINDOW,
    max_final_ratio: Optional[float] = None,
) -> ExperimentReport:
    """Fit the decay rate of a mean trace and compare it with the continuous rate.

    Passes iff slope + half_width < 0, the slope is at most
    −min_fraction_of_rho·ρ when ρ is given, and at most `max_slope` when
    that is given. With `max_final_ratio`, the last mean must also be below
    that fraction of the first. Any diverged path fails the check.
    """
    series = ensemble.trace(trace)
    fit = fit_exponential_rate(ensemble.times, series.value, window)
    ceiling = 0.0
    if rho is not None:
        ceiling = min(ceiling, -min_fraction_of_rho * rho)
    if max_slope is not None:
        ceiling = min(ceiling, max_slope)
    passed = fit.slope + fit.half_width < 0 and fit.slope <= ceiling and ensemble.n_diverged == 0
    notes = [f"{ensemble.n_diverged} diverged path(s)"] if ensemble.n_diverged else []
    if fit.shortened:
        notes.append("fit window shortened")
    initial, final = float(series.value[0]), float(series.value[-1])
    ratio = final / initial if initial else math.nan
    description = f"slope + half-width < 0 and slope ≤ {ceiling:g}"
    if max_final_ratio is not None:
        passed = passed and ratio < max_final_ratio
        description += f", final/initial < {max_final_ratio:g}"
    return ExperimentReport(
        kind="exponential_stability",
        passed=bool(passed),
        bound=ceiling,
        bound_description=description,
        measured={
            "slope": fit.slope,
            "half_width": fit.half_width,
            "rho": rho,
            "initial": initial,
            "final": final,
            "final_over_initial": ratio,
            "divergence_fraction": ensemble.divergence_fraction,
        },
        fit=fit,
        rows=trace_rows(ensemble, [trace]),
        notes=notes,
    )


def integrability_bound(rho: float, rho_tilde: float, T: float, ev0: float) -> float:
    """Return e^{(ρ+ρ̃)T}(1 + E V(X₀))."""
    return math.exp((rho + rho_tilde) * T) * (1.0 + ev0)


def estimate_v_integrability(
    ensemble: PathEnsemble,
    rho: float,
    rho_tilde: float,
    T: Optional[float] = None,
    ev0: Optional[float] = None,
    trace: str = "mean_V",
    se_multiplier: float = 3.0,
) -> ExperimentReport:
    """Compare max_k mean V(X̄_k) with e^{(ρ+ρ̃)T}(1 + E V(X₀)).

    Each step passes when its mean is at most the bound plus `se_multiplier`
    standard errors. E V(X₀) defaults to the mean at step 0; T to the last
    grid time. Any diverged path fails the check.
    """
    series = ensemble.trace(trace)
    horizon = float(ensemble.times[-1]) if T is None else T
    start = float(series.value[0]) if ev0 is None else ev0
    bound = integrability_bound(rho, rho_tilde, horizon, start)
    means = series.value
    finite = np.isfinite(means)
    worst = int(np.nanargmax(np.where(finite, means, -np.inf))) if finite.any() else 0
    within = bool(finite.all() and np.all(means <= bound + se_multiplier * series.standard_error))
    passed = within and ensemble.n_diverged == 0
    notes = []
    if ensemble.n_diverged:
        notes.append(f"{ensemble.n_diverged} of {ensemble.n_paths} paths diverged")
    logger.info("V-integrability: max mean %.6g vs bound %.6g (%s)", means[worst], bound, "pass" if passed else "FAIL")
    return ExperimentReport(
        kind="v_integrability",
        passed=passed,
        bound=bound,
        bound_description=f"exp((rho + rho_tilde) T) (1 + E V(X0)), plus {se_multiplier:g} SE",
        measured={
            "max_mean": float(means[worst]) if finite.any() else math.nan,
            "max_step": worst,
            "standard_error_at_max": float(series.standard_error[worst]),
            "rho": rho,
            "rho_tilde": rho_tilde,
            "T": horizon,
            "EV0": start,
            "divergence_fraction": ensemble.divergence_fraction,
        },
        rows=trace_rows(ensemble, [trace]),
        notes=notes,
    )


def detect_as_stability(ensemble: PathEnsemble, epsilon: float = 1e-3, min_fraction: float = 0.99) -> ExperimentReport:
    """Return the fraction of paths that did not diverge and end with |X̄_K| < ε.

    Passes iff the fraction is at least `min_fraction` and no path diverged.
    """
    norms = np.linalg.norm(ensemble.terminal, axis=1)
    settled = (~ensemble.diverged) & (norms < epsilon)
    fraction = float(settled.sum()) / ensemble.n_paths
    passed = fraction >= min_fraction and ensemble.n_diverged == 0
    finite = norms[np.isfinite(norms)]
    return ExperimentReport(
        kind="as_stability",
        passed=passed,
        bound=min_fraction,
        bound_description=f"fraction of paths with |X_K| < {epsilon:g} ≥ {min_fraction:g}, no divergence",
        measured={
            "fraction": fraction,
            "epsilon": epsilon,
            "n_diverged": ensemble.n_diverged,
            "median_terminal_norm": float(np.median(finite)) if finite.size else math.nan,
            "max_terminal_norm": float(np.max(finite)) if finite.size else math.nan,
        },
        rows=trace_rows(ensemble),
    )


def estimate_strong_rate(
    result: Union[StrongErrorResult, Tuple[Sequence[float], Sequence[float]]], confidence: float = 0.95
) -> FitResult:
    """Fit log error against log h.

    Levels whose error is zero or not finite are excluded and listed in
    `FitResult.excluded`.

    Raises:
        EstimationError: fewer than four levels remain
    """
    if isinstance(result, StrongErrorResult):
        levels, errors = result.levels, result.errors
    else:
        levels, errors = result
    h = np.asarray(levels, dtype=float)
    err = np.asarray(errors, dtype=float)
    usable = np.isfinite(err) & (err > 0)
    excluded = tuple(float(v) for v in h[~usable])
    if excluded:
        logger.warning("strong rate: excluded levels %s with zero or non-finite error", excluded)
    order = np.argsort(h[usable])
    return _linear_fit(np.log(h[usable][order]), np.log(err[usable][order]), confidence, excluded=excluded)


def check_strong_rate(
    result: StrongErrorResult, lower: float = 0.4, upper: float = 0.6, confidence: float = 0.95
) -> ExperimentReport:
    """Pass iff the fitted strong order lies in [lower, upper]."""
    fit = estimate_strong_rate(result, confidence)
    return ExperimentReport(
        kind="strong_rate",
        passed=lower <= fit.slope <= upper,
        bound=lower,
        bound_description=f"slope ∈ [{lower:g}, {upper:g}]",
        measured={"slope": fit.slope, "half_width": fit.half_width, "upper": upper, **result.to_dict()},
        fit=fit,
        notes=[f"excluded levels {list(fit.excluded)}"] if fit.excluded else [],
    )


@dataclass(frozen=True)
class MomentClaim:
    """Which moments an ensemble actually supports.

    Attributes:
        p0: the moment order a convergence argument asks for, if known
        estimated: sup_k E|X̄_k|^p for the orders that were recorded
        missing: requested orders with no recorded trace
    """

    p0: Optional[float]
    estimated: Dict[float, float]
    missing: Tuple[float, ...]

    @property
    def covers_p0(self) -> bool:
        return self.p0 is not None and any(p >= self.p0 and math.isfinite(v) for p, v in self.estimated.items())


def estimate_moments(ensemble: PathEnsemble, orders: Sequence[float], p0: Optional[float] = None) -> MomentClaim:
    """Return sup_k E|X̄_k|^p for each order recorded as an `abs_moment_p` functional."""
    estimated: Dict[float, float] = {}
    missing: List[float] = []
    for p in orders:
        name = f"abs_moment_{p:g}"
        if name in ensemble.traces:
            estimated[p] = float(np.nanmax(ensemble.traces[name].value))
        else:
            missing.append(p)
    if missing:
        logger.info("moments not estimated for orders %s", missing)
    return MomentClaim(p0=p0, estimated=estimated, missing=tuple(missing))
