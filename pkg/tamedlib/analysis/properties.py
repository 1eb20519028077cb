"""Pathwise properties: non-negativity and order preservation.

Both checks count exact events (negative iterates, X̄_k > Ȳ_k) with zero
tolerance; they are pathwise statements, not statistical ones.
"""

from dataclasses import dataclass
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from tamedlib.analysis.report import ExperimentReport, TraceRow
from tamedlib.core.catalog import ComparisonPair
from tamedlib.core.sampling import SampleSpec
from tamedlib.montecarlo.ensemble import DEFAULT_BATCH_SIZE, PathEnsemble, run_in_batches
from tamedlib.montecarlo.rng import RngSpec
from tamedlib.scheme.coefficients import TamedCoefficients
from tamedlib.scheme.config import SchemeConfig, SchemeKind
from tamedlib.taming.conditions import check_drift_order, check_lipschitz_certificate, check_origin_conditions
from tamedlib.taming.plan import lipschitz_taming
from tamedlib.taming.thresholds import HThreshold, positivity_threshold

logger = logging.getLogger(__name__)


def check_nonnegativity(ensemble: PathEnsemble, threshold: Optional[HThreshold] = None) -> ExperimentReport:
    """Count negative iterates over all paths and steps.

    The ensemble must carry the `negative_count` functional. When
    `threshold` is given and does not admit the ensemble's step size, a
    note records that the positivity hypothesis is unmet; the count is
    still reported.
    """
    counts = ensemble.trace("negative_count").value
    total = int(round(float(np.sum(counts))))
    hits = np.flatnonzero(counts > 0)
    first = int(hits[0]) if hits.size else None
    notes: List[str] = []
    if threshold is not None and not threshold.admits(ensemble.h):
        message = f"h={ensemble.h:g} exceeds the positivity threshold {threshold.h_max:g}"
        logger.warning(message)
        notes.append(message)
    rows = [
        TraceRow(k, float(t), "negative_count", float(c), 0.0) for k, (t, c) in enumerate(zip(ensemble.times, counts))
    ]
    return ExperimentReport(
        kind="nonnegativity",
        passed=total == 0,
        bound=0.0,
        bound_description="no negative iterate",
        measured={
            "negative_step_count": total,
            "first_violation_step": first,
            "first_violation_time": float(ensemble.times[first]) if first is not None else None,
            "path_steps": ensemble.n_paths * (len(ensemble.times) - 1),
        },
        rows=rows,
        notes=notes,
    )


@dataclass(frozen=True)
class ComparisonHypotheses:
    """Sampled hypotheses of the comparison result.

    Attributes:
        drift_order: ν^h ≤ λ^h on the samples
        certificate_mu: smallest μ for which both Lipschitz certificates hold on the samples
        certificate: the μ in use is at least `certificate_mu`
        threshold: the step-size ceiling for the μ in use
        origin: b(t, 0) ≥ 0 and σ(t, 0) = 0 for both models
        initial_order: X̄₀ ≤ Ȳ₀
    """

    drift_order: bool
    certificate_mu: float
    certificate: bool
    threshold: HThreshold
    origin: bool
    initial_order: bool

    def failures(self, h: float) -> List[str]:
        failed = []
        if not self.drift_order:
            failed.append("drift order ν^h ≤ λ^h")
        if not self.certificate:
            failed.append(f"Lipschitz certificate μ ≥ {self.certificate_mu:.6g}")
        if not self.threshold.admits(h):
            failed.append(f"h ≤ {self.threshold.h_max:g} from the comparison threshold")
        if not self.initial_order:
            failed.append("initial order X0 ≤ Y0")
        return failed


def comparison_hypotheses(
    lower: TamedCoefficients,
    upper: TamedCoefficients,
    x0_pair: Tuple[float, float],
    h: float,
    alpha: float,
    mu: Optional[float] = None,
    sample_spec: Optional[SampleSpec] = None,
) -> ComparisonHypotheses:
    """Check the comparison hypotheses on samples.

    Without `mu`, μ is calibrated as the largest sampled certificate ratio
    at μ = 1, the smallest μ the samples support.
    """
    spec = sample_spec or SampleSpec()
    origin = check_origin_conditions(lower.base) and check_origin_conditions(upper.base)
    # positivity is preserved under the origin conditions, so the order is only needed on x ≥ 0
    order = check_drift_order(lower, upper, h, spec, nonnegative=origin)
    ratios = [check_lipschitz_certificate(t, 1.0, alpha, h, spec).max_ratio for t in (lower, upper)]
    calibrated = max(ratios + [1e-12])
    chosen = calibrated if mu is None else mu
    certificate = mu is None or mu >= calibrated
    if not certificate:
        logger.warning("Lipschitz certificate needs μ ≥ %.6g, configured μ=%g", calibrated, mu)
    threshold = positivity_threshold(chosen, alpha)
    logger.info("comparison: certificate μ=%.6g, h_max=%.6g", chosen, threshold.h_max)
    return ComparisonHypotheses(
        drift_order=order.passed,
        certificate_mu=calibrated,
        certificate=certificate,
        threshold=threshold,
        origin=origin,
        initial_order=x0_pair[0] <= x0_pair[1],
    )


def run_comparison(
    pair: ComparisonPair,
    x0_pair: Tuple[float, float],
    h: float,
    T: float,
    n_paths: int,
    rng: RngSpec,
    alpha: float = 0.5,
    degree: float = 1.0,
    mu: Optional[float] = None,
    sample_spec: Optional[SampleSpec] = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
    workers: Optional[int] = None,
) -> ExperimentReport:
    """Run coupled truncated-noise schemes for the pair and count order violations.

    Both drifts are Lipschitz-tamed with the given `degree` and `alpha`.
    Both paths of a pair consume the same ζ_h draws. A violation is a step
    where X̄_k > Ȳ_k strictly. Passes iff there is no violation and every
    sampled hypothesis holds.
    """
    lower = lipschitz_taming(pair.lower, degree, alpha)
    upper = lipschitz_taming(pair.upper, degree, alpha)
    hypotheses = comparison_hypotheses(lower, upper, x0_pair, h, alpha, mu, sample_spec)
    failed = hypotheses.failures(h)
    for message in failed:
        logger.warning("comparison hypothesis unmet: %s", message)
    scheme_low = SchemeConfig(SchemeKind.truncated_noise_balanced, h, T, taming=lower)
    scheme_up = SchemeConfig(SchemeKind.truncated_noise_balanced, h, T, taming=upper)
    step_low, step_up = scheme_low.stepper(lower), scheme_up.stepper(upper)
    n_steps = scheme_low.n_steps
    sqrt_h = math.sqrt(h)

    def run_batch(paths: range) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        dW = sqrt_h * rng.batch_normals(paths, n_steps, 1)
        x = np.full((len(paths), 1), float(x0_pair[0]))
        y = np.full((len(paths), 1), float(x0_pair[1]))
        violations = np.zeros(n_steps + 1)
        max_gap = np.full(n_steps + 1, -np.inf)
        negatives = np.zeros(n_steps + 1)
        identical = np.ones(len(paths), dtype=bool)
        for k in range(n_steps + 1):
            if k:
                x = step_low((k - 1) * h, x, dW[:, k - 1, :])
                y = step_up((k - 1) * h, y, dW[:, k - 1, :])
            gap = (x - y)[:, 0]
            violations[k] = float(np.sum(gap > 0))
            max_gap[k] = float(np.max(gap))
            negatives[k] = float(np.sum((x[:, 0] < 0) | (y[:, 0] < 0)))
            identical &= x[:, 0] == y[:, 0]
        return violations, max_gap, negatives, identical

    batches = run_in_batches(run_batch, n_paths, batch_size, workers)
    violations = np.sum([b[0] for b in batches], axis=0)
    max_gap = np.max([b[1] for b in batches], axis=0)
    negatives = np.sum([b[2] for b in batches], axis=0)
    identical = bool(np.all(np.concatenate([b[3] for b in batches])))
    count = int(violations.sum())
    times = scheme_low.times()
    rows = [TraceRow(k, float(t), "violation_count", float(v), 0.0) for k, (t, v) in enumerate(zip(times, violations))]
    rows += [TraceRow(k, float(t), "max_gap", float(g), 0.0) for k, (t, g) in enumerate(zip(times, max_gap))]
    logger.info("comparison: %d violation(s) over %d paths × %d steps", count, n_paths, n_steps)
    return ExperimentReport(
        kind="comparison",
        passed=count == 0 and not failed,
        bound=0.0,
        bound_description="no step with X_k > Y_k",
        measured={
            "violation_count": count,
            "max_gap": float(np.max(max_gap)),
            "negative_count": int(negatives.sum()),
            "paths_identical": identical,
            "certificate_mu": hypotheses.certificate_mu,
            "h_max": hypotheses.threshold.h_max,
            "origin_conditions": hypotheses.origin,
        },
        rows=rows,
        notes=[f"hypothesis unmet: {message}" for message in failed],
    )

