"""Sampled checks of the hypotheses behind the taming results.

Every check evaluates both sides of an inequality on a sample cloud (see
`tamedlib.core.sampling.SampleSpec`) and reports the worst ratio. A
sample where the right side vanishes while the left side does not is a
hard violation, never a division error. These checks verify on samples
only; they do not prove the ∀x statements.
"""

from dataclasses import dataclass
from enum import Enum
import logging
from typing import Callable, Optional, Sequence, Union

import numpy as np

from tamedlib.core.lyapunov import LyapunovSpec, LyapunovSubclass, norm_power
from tamedlib.core.model import SdeModel
from tamedlib.core.operator import generator_value
from tamedlib.core.sampling import SampleSpec
from tamedlib.errors import ConfigurationError
from tamedlib.scheme.coefficients import TamedCoefficients
from tamedlib.scheme.projection import ProjectionConfig

logger = logging.getLogger(__name__)

RATIO_TOLERANCE = 1e-9

System = Union[SdeModel, TamedCoefficients]
ZFn = Callable[[np.ndarray], np.ndarray]


class TamingCondition(str, Enum):
    """Inequalities on the tamed coefficients."""

    # |b^h|h^{β₁} ∨ ‖σ^h‖h^{β₂} ≤ μ(1+V)^γ
    integrability = "integrability"
    # ... ≤ μ(1+U)^γ z^h/(1+U+z^h)
    stability_as = "stability_as"
    # ... ≤ μV^γ
    stability_exp = "stability_exp"
    # ... ≤ μU^γ z^h/(U+z^h)
    stability_simplified = "stability_simplified"
    # ‖V^{(i+2j)}‖|b^h|^i‖σ^h‖^{2j}h^{(i+j)/2} ≤ μz^h
    combo = "combo"
    # |b^h − b(t,0)|h^α ∨ |σ^h|h^{α/2} ≤ μ|x|
    linear_bound = "linear_bound"


class DriftForm(str, Enum):
    """Lyapunov drift inequalities."""

    le_rho_one_plus_V = "le_rho_one_plus_V"
    le_minus_z = "le_minus_z"
    le_minus_rho_V = "le_minus_rho_V"


@dataclass(frozen=True)
class ViolationReport:
    """Outcome of a sampled check.

    Attributes:
        condition: the inequality checked
        max_ratio: worst LHS/RHS over the samples (or worst margin for drift forms)
        worst_x: the sample attaining it
        passed: max_ratio within tolerance and no hard violations
        hard_violations: samples with RHS = 0 < LHS
        n_samples: how many points were checked
        bound: the constant the check was made against (μ, ρ, K or λ)
    """

    condition: str
    max_ratio: float
    worst_x: np.ndarray
    passed: bool
    hard_violations: int
    n_samples: int
    bound: float

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "max_ratio": self.max_ratio,
            "worst_x": [float(v) for v in np.ravel(self.worst_x)],
            "passed": self.passed,
            "hard_violations": self.hard_violations,
            "n_samples": self.n_samples,
            "bound": self.bound,
        }


def _as_tamed(system: System) -> TamedCoefficients:
    return system if isinstance(system, TamedCoefficients) else TamedCoefficients.identity(system)


def _samples(
    system: System, sample_spec: Optional[SampleSpec], h: float, projection: Optional[ProjectionConfig]
) -> np.ndarray:
    spec = sample_spec or SampleSpec()
    model = _as_tamed(system).base
    max_radius = projection.radius(h) if projection is not None else None
    return spec.points(model.dim_state, max_radius)


def ratio_report(
    condition: str, lhs: np.ndarray, rhs: np.ndarray, samples: np.ndarray, bound: float
) -> ViolationReport:
    """Return the worst LHS/RHS with zero right sides counted as hard violations."""
    hard = (rhs <= 0) & (lhs > 0)
    safe = np.where(rhs > 0, rhs, 1.0)
    ratios = np.where(rhs > 0, lhs / safe, np.where(lhs > 0, np.inf, 0.0))
    worst = int(np.argmax(ratios))
    report = ViolationReport(
        condition=condition,
        max_ratio=float(ratios[worst]),
        worst_x=samples[worst].copy(),
        passed=bool(not hard.any() and ratios[worst] <= 1.0 + RATIO_TOLERANCE),
        hard_violations=int(hard.sum()),
        n_samples=int(samples.shape[0]),
        bound=bound,
    )
    _log(report)
    return report


def _log(report: ViolationReport) -> None:
    if report.passed:
        logger.info("%s: pass (max ratio %.6g over %d samples)", report.condition, report.max_ratio, report.n_samples)
    else:
        logger.warning(
            "%s: FAIL (max ratio %.6g at x=%s, %d hard violations)",
            report.condition,
            report.max_ratio,
            np.array2string(report.worst_x, precision=4),
            report.hard_violations,
        )


def default_z(tamed: TamedCoefficients, lyap: LyapunovSpec, t: float, h: float) -> ZFn:
    """Return z^h = max(−L^hV, 0)."""

    def z(x: np.ndarray) -> np.ndarray:
        return np.maximum(-generator_value(lyap, x, tamed.drift(t, x, h), tamed.diffusion(t, x, h)), 0.0)

    return z


def check_taming_conditions(
    tamed_or_model: System,
    lyap: LyapunovSpec,
    condition: Union[TamingCondition, str],
    mu: float,
    h: float,
    sample_spec: Optional[SampleSpec] = None,
    t: float = 0.0,
    beta1: float = 0.5,
    beta2: float = 0.25,
    alpha: float = 0.25,
    z: Optional[ZFn] = None,
    projection: Optional[ProjectionConfig] = None,
) -> ViolationReport:
    """Check a taming condition at step size `h` on the sample cloud.

    Samples are restricted to the projection ball when `projection` is
    given. The combo condition falls back to the simplified stability form
    unless `lyap` is hat-subclass with higher derivatives supplied.
    """
    condition = TamingCondition(condition)
    tamed = _as_tamed(tamed_or_model)
    x = _samples(tamed, sample_spec, h, projection)
    b = tamed.drift(t, x, h)
    sigma = tamed.diffusion(t, x, h)
    b_norm = np.linalg.norm(b, axis=1)
    s_norm = np.linalg.norm(sigma.reshape(x.shape[0], -1), axis=1)
    v = lyap.value(x)
    gamma = lyap.gamma

    if condition is TamingCondition.linear_bound:
        b0 = tamed.drift(t, np.zeros((1, x.shape[1])), h)
        lhs = np.maximum(np.linalg.norm(b - b0, axis=1) * h**alpha, s_norm * h ** (alpha / 2))
        return ratio_report(condition.value, lhs, mu * np.linalg.norm(x, axis=1), x, mu)

    lhs = np.maximum(b_norm * h**beta1, s_norm * h**beta2)
    if condition is TamingCondition.integrability:
        return ratio_report(condition.value, lhs, mu * (1.0 + v) ** gamma, x, mu)
    if condition is TamingCondition.stability_exp:
        return ratio_report(condition.value, lhs, mu * v**gamma, x, mu)

    zh = (z or default_z(tamed, lyap, t, h))(x)
    u = lyap.U(x)
    if condition is TamingCondition.combo:
        if lyap.subclass is LyapunovSubclass.hat and lyap.higher_derivative_hs_norm is not None:
            return _combo(lyap, x, b_norm, s_norm, zh, mu, h)
        logger.info("combo condition needs hat-subclass higher derivatives; checking the simplified form")
        condition = TamingCondition.stability_simplified
    if condition is TamingCondition.stability_as:
        rhs_unit = (1.0 + u) ** gamma * zh / (1.0 + u + zh)
    else:
        denom = u + zh
        rhs_unit = np.where(denom > 0, u**gamma * zh / np.where(denom > 0, denom, 1.0), 0.0)
    return ratio_report(condition.value, lhs, mu * rhs_unit, x, mu)


def _combo(
    lyap: LyapunovSpec, x: np.ndarray, b_norm: np.ndarray, s_norm: np.ndarray, zh: np.ndarray, mu: float, h: float
) -> ViolationReport:
    pairs = [(2, 0)] + [(i, j) for j in range(lyap.p // 2 + 1) for i in range(lyap.p + 1) if 3 <= i + 2 * j <= lyap.p]
    worst: Optional[ViolationReport] = None
    for i, j in pairs:
        norm = lyap.derivative_norm(x, i + 2 * j)
        assert norm is not None, f"derivative of order {i + 2 * j} missing"
        lhs = norm * b_norm**i * s_norm ** (2 * j) * h ** ((i + j) / 2)
        report = ratio_report(f"combo(i={i},j={j})", lhs, mu * zh, x, mu)
        if worst is None or report.max_ratio > worst.max_ratio:
            worst = report
    assert worst is not None
    passed = worst.passed
    return ViolationReport("combo", worst.max_ratio, worst.worst_x, passed, worst.hard_violations, worst.n_samples, mu)


def check_lyapunov_drift(
    tamed_or_model: System,
    lyap: LyapunovSpec,
    form: Union[DriftForm, str],
    rho: Optional[float] = None,
    z: Optional[ZFn] = None,
    sample_spec: Optional[SampleSpec] = None,
    h: Optional[float] = None,
    t: float = 0.0,
) -> ViolationReport:
    """Check LV (or L^hV when `h` is given) against a drift form on the samples.

    `max_ratio` holds the largest margin LHS − RHS, scaled by 1 + |LHS| + |RHS|;
    the check passes when it does not exceed 1e−9.
    """
    form = DriftForm(form)
    tamed = _as_tamed(tamed_or_model)
    step = 0.0 if h is None else h
    spec = sample_spec or SampleSpec()
    x = spec.points(tamed.base.dim_state)
    if h is None:
        b, sigma = tamed.base.drift(t, x), tamed.base.diffusion(t, x)
    else:
        b, sigma = tamed.drift(t, x, step), tamed.diffusion(t, x, step)
    lv = generator_value(lyap, x, b, sigma)
    v = lyap.value(x)
    if form is DriftForm.le_minus_z:
        if z is None:
            raise ConfigurationError("le_minus_z needs a z evaluator")
        rhs = -z(x)
        bound = 0.0
    else:
        if rho is None:
            raise ConfigurationError(f"{form.value} needs ρ")
        rhs = rho * (1.0 + v) if form is DriftForm.le_rho_one_plus_V else -rho * v
        bound = rho
    margin = (lv - rhs) / (1.0 + np.abs(lv) + np.abs(rhs))
    worst = int(np.argmax(margin))
    report = ViolationReport(
        condition=form.value,
        max_ratio=float(margin[worst]),
        worst_x=x[worst].copy(),
        passed=bool(margin[worst] <= RATIO_TOLERANCE),
        hard_violations=0,
        n_samples=int(x.shape[0]),
        bound=bound,
    )
    _log(report)
    return report


def check_z_growth(
    z: ZFn, lyap: LyapunovSpec, model: SdeModel, lam: float, sample_spec: Optional[SampleSpec] = None
) -> ViolationReport:
    """Check z ≥ λ(1+U)^{1−γ}(U^{κ₁γ} ∨ U^{κ₂γ}) on the samples."""
    spec = sample_spec or SampleSpec()
    x = spec.points(model.dim_state)
    u = lyap.U(x)
    g = model.growth
    envelope = np.maximum(u ** (g.kappa1 * lyap.gamma), u ** (g.kappa2 * lyap.gamma))
    required = lam * (1.0 + u) ** (1.0 - lyap.gamma) * envelope
    return ratio_report("z_growth", required, z(x), x, lam)


def check_one_sided_lipschitz(
    drift: Callable[[float, np.ndarray], np.ndarray], K: float, sample_spec: Optional[SampleSpec] = None, dim: int = 1
) -> ViolationReport:
    """Check ⟨x − y, b(x) − b(y)⟩ ≤ K|x − y|² on sampled pairs."""
    x, y = (sample_spec or SampleSpec()).pairs(dim)
    diff = x - y
    lhs = np.einsum("ni,ni->n", diff, drift(0.0, x) - drift(0.0, y))
    rhs = K * np.einsum("ni,ni->n", diff, diff)
    # a non-positive left side satisfies the bound even where x = y
    return ratio_report("one_sided_lipschitz", np.maximum(lhs, 0.0), rhs, x, K)


def check_origin_conditions(model: SdeModel, times: Sequence[float] = tuple(np.linspace(0.0, 10.0, 100))) -> bool:
    """Return True if b(t, 0) ≥ 0 and σ(t, 0) = 0 at every sampled t."""
    origin = np.zeros((1, model.dim_state))
    for t in times:
        if np.any(model.drift(float(t), origin) < 0) or np.any(model.diffusion(float(t), origin) != 0):
            logger.warning("origin condition fails for %s at t=%g", model.name, t)
            return False
    return True


def check_linear_bound(
    tamed: TamedCoefficients, mu: float, alpha: float, h: float, sample_spec: Optional[SampleSpec] = None
) -> ViolationReport:
    """Check |b^h − b(t,0)|h^α ∨ |σ^h|h^{α/2} ≤ μ|x| on the samples."""
    return check_taming_conditions(tamed, norm_power(2), TamingCondition.linear_bound, mu, h, sample_spec, alpha=alpha)


def check_lipschitz_certificate(
    tamed: TamedCoefficients, mu: float, alpha: float, h: float, sample_spec: Optional[SampleSpec] = None
) -> ViolationReport:
    """Check |λ^h(x) − λ^h(y)|h^α ∨ |σ^h(x) − σ^h(y)|h^{α/2} ≤ μ|x − y| on sampled pairs."""
    x, y = (sample_spec or SampleSpec()).pairs(tamed.base.dim_state)
    db = np.linalg.norm(tamed.drift(0.0, x, h) - tamed.drift(0.0, y, h), axis=1)
    ds = np.linalg.norm((tamed.diffusion(0.0, x, h) - tamed.diffusion(0.0, y, h)).reshape(x.shape[0], -1), axis=1)
    lhs = np.maximum(db * h**alpha, ds * h ** (alpha / 2))
    return ratio_report("lipschitz_certificate", lhs, mu * np.linalg.norm(x - y, axis=1), x, mu)


def check_drift_order(
    lower: TamedCoefficients,
    upper: TamedCoefficients,
    h: float,
    sample_spec: Optional[SampleSpec] = None,
    nonnegative: bool = False,
) -> ViolationReport:
    """Check ν^h(x) ≤ λ^h(x) on the samples, folded onto x ≥ 0 if `nonnegative`."""
    x = (sample_spec or SampleSpec()).points(lower.base.dim_state)
    if nonnegative:
        x = np.abs(x)
    gap = lower.drift(0.0, x, h)[:, 0] - upper.drift(0.0, x, h)[:, 0]
    # ratio against zero: any positive gap is a hard violation
    return ratio_report("drift_order", np.maximum(gap, 0.0), np.zeros_like(gap), x, 0.0)


def square_decrease_margin(tamed: TamedCoefficients, t: float, x: np.ndarray, h: float) -> np.ndarray:
    """Return −(L^h|x|² + |b^h|²h), the expected one-step decrease of |X|² divided by h.

    Non-negative values mean E|X_{k+1}|² ≤ |X_k|² from x.
    """
    b = tamed.drift(t, x, h)
    sigma = tamed.diffusion(t, x, h)
    lv = 2.0 * np.einsum("ni,ni->n", x, b) + np.einsum("nij,nij->n", sigma, sigma)
    return -(lv + np.einsum("ni,ni->n", b, b) * h)
