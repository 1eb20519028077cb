"""Turn a validated `ExperimentConfig` into simulations and verdicts.

Derived thresholds (h_max, r, μ) are computed and logged before anything is
simulated. A step size above a derived ceiling is run anyway, with a
warning; builders that refuse such a step raise `ThresholdError`, which the
command line reports as a configuration error.
"""

from dataclasses import dataclass, field
import logging
import math
import os
import time
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Union

import numpy as np

from tamedlib.analysis.estimators import (
    check_exponential_stability,
    check_strong_rate,
    detect_as_stability,
    estimate_moments,
    estimate_v_integrability,
)
from tamedlib.analysis.properties import check_nonnegativity, run_comparison
from tamedlib.analysis.report import ExperimentReport, TraceRow, trace_rows
from tamedlib.cli.config import (
    ENSEMBLE_CHECKS,
    AsStabilityCheck,
    Check,
    ComparisonCheck,
    ConditionsCheck,
    DriftCheck,
    ExperimentConfig,
    ExponentialStabilityCheck,
    GSection,
    MomentsCheck,
    NonnegativityCheck,
    StrongRateCheck,
    VIntegrabilityCheck,
)
from tamedlib.core.catalog import CATALOG, ComparisonPair
from tamedlib.core.lyapunov import LyapunovSpec
from tamedlib.core.model import SdeModel, describe
from tamedlib.core.sampling import SampleSpec
from tamedlib.errors import ConfigurationError
from tamedlib.montecarlo.coupling import COUPLING_BATCH_SIZE, couple_strong_error
from tamedlib.montecarlo.ensemble import (
    DEFAULT_BATCH_SIZE,
    Functional,
    InitialCondition,
    PathEnsemble,
    simulate_ensemble,
)
from tamedlib.montecarlo.rng import RngSpec
from tamedlib.scheme.coefficients import TamedCoefficients
from tamedlib.scheme.config import SchemeConfig, System
from tamedlib.scheme.projection import ProjectionConfig
from tamedlib.taming.conditions import ViolationReport, check_lyapunov_drift, check_taming_conditions
from tamedlib.taming.plan import (
    build_balanced_taming,
    build_projected_stability_taming,
    build_stability_taming,
    lipschitz_taming,
    plan_balanced_taming,
    plan_projected_stability_taming,
    positivity_taming,
)
from tamedlib.taming.thresholds import (
    HPurpose,
    ProjectionPurpose,
    compute_mu_threshold,
    compute_rho_tilde,
    derive_h_threshold,
    derive_projection_exponent,
    positivity_threshold,
)

logger = logging.getLogger(__name__)

WORKERS_ENV = "TAMEDLIB_WORKERS"

# projection rules whose step-size ceiling comes from the stability results
_PROJECTED_H_PURPOSE = {
    ProjectionPurpose.stab2: HPurpose.v_exp_projected,
    ProjectionPurpose.stab2_refined: HPurpose.v_exp_projected,
    ProjectionPurpose.projected_as_stability: HPurpose.projected_as_stability,
}


def default_workers() -> int:
    """Return the worker count from TAMEDLIB_WORKERS, or 1."""
    value = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(value)) if value else 1
    except ValueError:
        raise ConfigurationError(f"{WORKERS_ENV} must be a positive integer, got {value!r}") from None


@dataclass
class CheckOutcome:
    """A report together with the verdict the config expected."""

    label: str
    expect: str
    report: ExperimentReport

    @property
    def matched(self) -> bool:
        return self.report.passed == (self.expect == "pass")


@dataclass
class RunOutcome:
    """Everything one run produced.

    Attributes:
        config: the resolved configuration
        derived: thresholds and constants computed before simulating
        checks: one outcome per check and step size, in config order
    """

    config: ExperimentConfig
    derived: Dict[str, Any]
    checks: List[CheckOutcome] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """True iff every verdict matches its expectation."""
        return all(check.matched for check in self.checks)


@dataclass(frozen=True)
class Setup:
    """The objects a config resolves to."""

    model: Optional[SdeModel]
    pair: Optional[ComparisonPair]
    lyap: Optional[LyapunovSpec]
    r: Optional[float]


def resolve(config: ExperimentConfig) -> Setup:
    """Build the model (or pair), the Lyapunov function and the projection exponent."""
    params = dict(config.model.params)
    if config.model.name in CATALOG.names("pair"):
        return Setup(model=None, pair=CATALOG.pair(config.model.name, **params), lyap=None, r=config.scheme.r)
    model = CATALOG.model(config.model.name, **params)
    lyap_params = dict(config.lyapunov.params)
    if config.lyapunov.name == "norm-power":
        lyap_params.setdefault("dim", model.dim_state)
    lyap = CATALOG.lyapunov(config.lyapunov.name, **lyap_params)
    r = config.scheme.r
    if r is None and config.scheme.kind.uses_projection:
        exponent = derive_projection_exponent(
            config.scheme.projection_purpose, lyap, model.growth, config.taming.beta2, config.taming.alpha
        )
        r = exponent.r
    return Setup(model=model, pair=None, lyap=lyap, r=r)


def projection_for(config: ExperimentConfig, r: Optional[float]) -> Optional[ProjectionConfig]:
    if not config.scheme.kind.uses_projection:
        return None
    if r is None or math.isinf(r):
        raise ConfigurationError(f"scheme {config.scheme.kind.value} needs a finite projection exponent r")
    return ProjectionConfig(r=r, variant=config.scheme.projection_variant)


def _g_function(section: GSection) -> Callable[[np.ndarray], np.ndarray]:
    def g(x: np.ndarray) -> np.ndarray:
        return section.coefficient * np.linalg.norm(x, axis=1) ** section.power

    return g


def build_system(config: ExperimentConfig, model: SdeModel, lyap: LyapunovSpec, h: float, r: Optional[float]) -> System:
    """Return the model or the tamed coefficients the config asks for at step size `h`."""
    taming = config.taming
    kind = taming.kind
    if kind == "none":
        return model
    if kind == "balanced":
        return build_balanced_taming(model, lyap, taming.mu, taming.beta2, taming.C, taming.kappa_star)
    if kind == "stability":
        return build_stability_taming(model, lyap, taming.mu, taming.lam, h, taming.C)
    if kind == "projected_stability":
        if r is None:
            raise ConfigurationError("projected_stability taming needs a projection exponent r")
        return build_projected_stability_taming(model, lyap, taming.mu, r, h, taming.alpha, taming.C)
    if kind == "lipschitz":
        return lipschitz_taming(model, taming.degree, taming.alpha)
    g = _g_function(taming.g)
    if kind == "positivity":
        return positivity_taming(model, g, taming.alpha)
    alpha = taming.alpha
    if kind == "case_i":
        return TamedCoefficients.case_i(model, lambda x, step: g(x) * step**alpha)
    return TamedCoefficients.single_g(model, g, alpha=alpha)


def derive_thresholds(config: ExperimentConfig, setup: Setup) -> Dict[str, Any]:
    """Compute and log h_max, r and μ before simulating; warn about unmet hypotheses."""
    derived: Dict[str, Any] = {}
    model, lyap = setup.model, setup.lyap
    if model is None or lyap is None:
        return derived
    taming = config.taming
    growth = model.growth
    derived["model"] = describe(model, lyap)
    derived["r"] = setup.r
    mu_max = compute_mu_threshold(lyap.c, lyap.p, model.dim_state)
    derived["mu"] = taming.mu
    derived["mu_threshold"] = mu_max
    h_max: Optional[float] = None
    if taming.kind == "balanced":
        plan = plan_balanced_taming(model, lyap, taming.mu, taming.beta2, taming.C, taming.kappa_star)
        h_max = plan.h_max
        derived["C"] = plan.C
    elif taming.kind == "stability":
        h_max = derive_h_threshold(HPurpose.as_stability, mu=taming.mu, lam=taming.lam, K=growth.K).h_max
    elif taming.kind == "projected_stability" and setup.r is not None:
        plan = plan_projected_stability_taming(
            model, lyap, taming.mu, setup.r, max(config.scheme.h), taming.alpha, taming.C
        )
        derived["C"] = plan.C
        derived["rate_factor"] = plan.rate_factor
    elif taming.kind == "none" and config.scheme.kind.uses_projection and setup.r is not None:
        purpose = _PROJECTED_H_PURPOSE.get(config.scheme.projection_purpose)
        if purpose is not None:
            threshold = derive_h_threshold(
                purpose,
                mu=taming.mu,
                lam=taming.lam,
                K=growth.K,
                nu=growth.nu,
                kappa_check=growth.kappa_check,
                gamma=lyap.gamma,
                q=growth.q,
                r=setup.r,
            )
            h_max = threshold.h_max
            if taming.mu >= mu_max:
                logger.warning("μ=%g is not below the stability threshold %.6g", taming.mu, mu_max)
    derived["h_max"] = h_max
    logger.info(
        "%s: r=%s, μ=%g (threshold %.6g), h_max=%s",
        config.name,
        "none" if setup.r is None else f"{setup.r:g}",
        taming.mu,
        mu_max,
        "n/a" if h_max is None else f"{h_max:.6g}",
    )
    if h_max is not None:
        for h in config.scheme.h:
            if not h < h_max and not (h_max == 1.0 and h == 1.0):
                logger.warning("hypothesis unmet: h=%g exceeds the derived h_max=%.6g; running anyway", h, h_max)
    return derived


def _initial(config: ExperimentConfig) -> InitialCondition:
    x0 = config.ensemble.x0
    if x0 is None:
        raise ConfigurationError("ensemble.x0 is required for simulated checks")
    return InitialCondition(x0.kind, tuple(x0.center), x0.spread)


def _functionals(checks: Sequence[Check], lyap: LyapunovSpec) -> List[Functional]:
    functionals = [Functional.mean_v(lyap), Functional.mean_square_norm(), Functional.max_norm()]
    if any(isinstance(c, NonnegativityCheck) for c in checks):
        functionals.append(Functional.negative_count())
    orders = sorted({p for c in checks if isinstance(c, MomentsCheck) for p in c.orders})
    functionals += [Functional.abs_moment(p) for p in orders]
    return functionals


def _violation_report(kind: str, violation: ViolationReport, description: str) -> ExperimentReport:
    return ExperimentReport(
        kind=kind,
        passed=violation.passed,
        bound=violation.bound,
        bound_description=description,
        measured=violation.to_dict(),
    )


class ExperimentRunner:
    """Runs the checks of one config.

    Args:
        config: the resolved configuration
        workers: threads per ensemble; results do not depend on it
        kinds: restrict to these check kinds, or None for all
    """

    def __init__(
        self, config: ExperimentConfig, workers: Optional[int] = None, kinds: Optional[FrozenSet[str]] = None
    ) -> None:
        self.config = config
        self.workers = workers or config.ensemble.workers or default_workers()
        self.kinds = kinds
        self.setup = resolve(config)
        self.rng = RngSpec(config.ensemble.seed)
        self.projection = projection_for(config, self.setup.r)

    def __repr__(self) -> str:
        return f"<ExperimentRunner: {self.config.name}>"

    @property
    def checks(self) -> List[Check]:
        return [c for c in self.config.analysis if self.kinds is None or c.kind in self.kinds]

    def _label(self, check: Check, h: Optional[float] = None) -> str:
        label = check.label or check.kind
        if h is not None and len(self.config.scheme.h) > 1:
            label += f"@h={h:g}"
        return label

    def _inputs(self, h: Union[float, Sequence[float]]) -> Dict[str, Any]:
        return {
            "model": self.config.model.name,
            "scheme": self.config.scheme.kind.value,
            "taming": self.config.taming.kind,
            "h": h,
            "T": self.config.scheme.T,
            "r": self.setup.r,
            "n_paths": self.config.ensemble.n_paths,
            "seed": self.config.ensemble.seed,
        }

    def _scheme(self, h: float) -> SchemeConfig:
        return SchemeConfig(self.config.scheme.kind, h, self.config.scheme.T, projection=self.projection)

    def _system(self, h: float) -> System:
        assert self.setup.model is not None and self.setup.lyap is not None, "model runs need a model"
        return build_system(self.config, self.setup.model, self.setup.lyap, h, self.setup.r)

    def run(self) -> RunOutcome:
        """Derive thresholds, then run every selected check in config order."""
        outcome = RunOutcome(self.config, derive_thresholds(self.config, self.setup))
        checks = self.checks
        comparisons = [c for c in checks if isinstance(c, ComparisonCheck)]
        if self.setup.model is None and len(comparisons) < len(checks):
            raise ConfigurationError(f"{self.config.model.name} is a comparison pair; only comparison checks apply")
        if self.setup.model is not None and comparisons:
            raise ConfigurationError("comparison checks need a comparison pair model")
        ensembles: Dict[float, PathEnsemble] = {}
        for check in checks:
            steps: List[Optional[float]] = [None] if isinstance(check, StrongRateCheck) else list(self.config.scheme.h)
            for h in steps:
                started = time.perf_counter()
                if h is None:
                    assert isinstance(check, StrongRateCheck)
                    report = self._strong_rate(check)
                elif check.kind in ENSEMBLE_CHECKS:
                    if h not in ensembles:
                        ensembles[h] = self._simulate(h, checks)
                    report = self._evaluate(check, ensembles[h])
                elif isinstance(check, ComparisonCheck):
                    report = self._comparison(check, h)
                else:
                    report = self._sampled(check, h)
                outcome.checks.append(self._finish(check, h, report, started))
        for result in outcome.checks:
            status = "as expected" if result.matched else "UNEXPECTED"
            logger.info("%s: %s (%s)", result.label, "pass" if result.report.passed else "fail", status)
        return outcome

    def _finish(self, check: Check, h: Optional[float], report: ExperimentReport, started: float) -> CheckOutcome:
        report.runtime = time.perf_counter() - started
        if not report.inputs:
            report.inputs = self._inputs(h if h is not None else list(self.config.scheme.h))
        logger.info("%s finished in %.2f s", self._label(check, h), report.runtime)
        return CheckOutcome(self._label(check, h), check.expect, report)

    def _simulate(self, h: float, checks: Sequence[Check]) -> PathEnsemble:
        assert self.setup.lyap is not None
        return simulate_ensemble(
            self._system(h),
            self._scheme(h),
            _initial(self.config),
            self.config.ensemble.n_paths,
            self.rng,
            _functionals(checks, self.setup.lyap),
            batch_size=self.config.ensemble.batch_size or DEFAULT_BATCH_SIZE,
            workers=self.workers,
        )

    def _evaluate(self, check: Check, ensemble: PathEnsemble) -> ExperimentReport:
        model, lyap = self.setup.model, self.setup.lyap
        assert model is not None and lyap is not None
        if isinstance(check, VIntegrabilityCheck):
            rho_tilde = check.rho_tilde
            if rho_tilde is None:
                rho_tilde = compute_rho_tilde(
                    lyap.c, lyap.p, model.dim_state, check.mu, check.rho_tilde_mode, lyap.gamma, model.dim_noise
                )
            return estimate_v_integrability(ensemble, check.rho, rho_tilde, se_multiplier=check.se_multiplier)
        if isinstance(check, ExponentialStabilityCheck):
            return check_exponential_stability(
                ensemble,
                check.trace,
                check.rho,
                check.min_fraction_of_rho,
                check.max_slope,
                check.window,
                check.max_final_ratio,
            )
        if isinstance(check, AsStabilityCheck):
            return detect_as_stability(ensemble, check.epsilon, check.min_fraction)
        if isinstance(check, NonnegativityCheck):
            threshold = None
            if check.threshold_mu is not None:
                threshold = positivity_threshold(check.threshold_mu, check.threshold_alpha)
                logger.info("positivity threshold: h_max=%.6g", threshold.h_max)
            return check_nonnegativity(ensemble, threshold)
        assert isinstance(check, MomentsCheck), f"not an ensemble check: {check.kind}"
        return self._moments(check, ensemble)

    def _moments(self, check: MomentsCheck, ensemble: PathEnsemble) -> ExperimentReport:
        claim = estimate_moments(ensemble, check.orders, check.p0)
        finite = all(math.isfinite(v) for v in claim.estimated.values()) and not claim.missing
        passed = finite and (check.p0 is None or claim.covers_p0) and ensemble.n_diverged == 0
        names = [f"abs_moment_{p:g}" for p in check.orders]
        rows = trace_rows(ensemble, names)
        return ExperimentReport(
            kind="moments",
            passed=passed,
            bound=math.inf if check.p0 is None else check.p0,
            bound_description="every sup_k E|X_k|^p finite" + ("" if check.p0 is None else ", some p ≥ p0"),
            measured={"estimated": {f"{p:g}": v for p, v in claim.estimated.items()}, "p0": check.p0},
            rows=rows,
        )

    def _strong_rate(self, check: StrongRateCheck) -> ExperimentReport:
        levels = list(self.config.scheme.h)
        x0 = _initial(self.config)
        result = couple_strong_error(
            self._system(max(levels)),
            self._scheme,
            x0,
            levels,
            self.config.ensemble.n_paths,
            self.rng,
            h_ref=self.config.scheme.h_ref,
            metric=check.metric,
            reference=check.reference,
            batch_size=self.config.ensemble.batch_size or COUPLING_BATCH_SIZE,
            workers=self.workers,
        )
        report = check_strong_rate(result, check.lower, check.upper)
        # one row per level: the time column holds the step size
        report.rows = [
            TraceRow(i, h, "strong_error", err, se)
            for i, (h, err, se) in enumerate(zip(result.levels, result.errors, result.standard_errors))
        ]
        return report

    def _comparison(self, check: ComparisonCheck, h: float) -> ExperimentReport:
        assert self.setup.pair is not None
        return run_comparison(
            self.setup.pair,
            check.x0_pair,
            h,
            self.config.scheme.T,
            self.config.ensemble.n_paths,
            self.rng,
            alpha=check.alpha,
            degree=check.degree,
            mu=check.mu,
            batch_size=self.config.ensemble.batch_size or DEFAULT_BATCH_SIZE,
            workers=self.workers,
        )

    def _sampled(self, check: Check, h: float) -> ExperimentReport:
        lyap = self.setup.lyap
        assert lyap is not None
        system = self._system(h)
        if isinstance(check, ConditionsCheck):
            spec = SampleSpec(n=check.n_samples, radius=check.radius)
            violation = check_taming_conditions(
                system,
                lyap,
                check.condition,
                check.mu,
                h,
                spec,
                beta1=check.beta1,
                beta2=check.beta2,
                alpha=check.alpha,
                projection=self.projection,
            )
            return _violation_report("conditions", violation, f"{check.condition.value}: LHS ≤ μ·RHS on samples")
        assert isinstance(check, DriftCheck), f"not a sampled check: {check.kind}"
        spec = SampleSpec(n=check.n_samples, radius=check.radius)
        tamed = isinstance(system, TamedCoefficients)
        violation = check_lyapunov_drift(system, lyap, check.form, check.rho, sample_spec=spec, h=h if tamed else None)
        return _violation_report("drift", violation, f"{check.form.value} on samples")


def run_experiment(
    config: ExperimentConfig, workers: Optional[int] = None, kinds: Optional[FrozenSet[str]] = None
) -> RunOutcome:
    """Run `config` and return the outcome; nothing is written."""
    return ExperimentRunner(config, workers, kinds).run()


def describe_experiment(config: ExperimentConfig) -> Dict[str, Any]:
    """Return the resolved config, its digest and the derived thresholds, without simulating."""
    setup = resolve(config)
    return {
        "name": config.name,
        "config_digest": config.digest(),
        "config": config.canonical(),
        "derived": derive_thresholds(config, setup),
    }
