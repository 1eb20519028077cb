"""Taming plans and the builders that turn them into tamed coefficients.

Each builder checks the parameter guards of the result it relies on and
raises `ConfigurationError` (or `ThresholdError` for step sizes) naming
the violated inequality.

Examples:
    >>> import numpy as np
    >>> from tamedlib.core import catalog, lyapunov
    >>> tamed = build_balanced_taming(catalog.cubic(), lyapunov.norm_power(2), mu=1.0, beta2=0.25, kappa_star=2.0)
    >>> round(float(tamed.g_sigma(np.array([[2.0]]), 0.01)[0]), 4)
    1.2649

"""

from dataclasses import dataclass
from enum import Enum
import logging
import math
from typing import Callable, Optional

import numpy as np

from tamedlib.core.lyapunov import LyapunovSpec, LyapunovSubclass
from tamedlib.core.model import SdeModel
from tamedlib.errors import ConfigurationError, ThresholdError
from tamedlib.scheme.coefficients import TamedCoefficients

logger = logging.getLogger(__name__)


class TamingPurpose(str, Enum):
    """What a taming plan is for."""

    integrability = "integrability"
    as_stability = "as_stability"
    v_exp_stability = "v_exp_stability"
    positivity = "positivity"
    comparison = "comparison"


@dataclass(frozen=True)
class TamingPlan:
    """Parameters of a taming choice.

    Attributes:
        purpose: which property the plan preserves
        beta1: h-exponent in the drift bound
        beta2: h-exponent in the diffusion bound
        C: scale constant of G
        kappa_star: exponent on V (or U) in G
        mu: target bound constant
        r: projection exponent, when projected
        h_max: admissible step-size ceiling in (0, 1]
        alpha: h-exponent of the single-G balanced forms
        rate_factor: discrete-rate factor, for the projected balanced plan
    """

    purpose: TamingPurpose
    beta1: float
    beta2: float
    C: float
    kappa_star: float
    mu: float
    r: Optional[float] = None
    h_max: float = 1.0
    alpha: float = 0.25
    rate_factor: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise ConfigurationError(f"μ > 0 violated: μ={self.mu}")
        if not 0 < self.h_max <= 1:
            raise ConfigurationError(f"h_max ∈ (0,1] violated: h_max={self.h_max}")
        if not self.C > 0:
            raise ConfigurationError(f"C > 0 violated: C={self.C}")


def validate_taming_exponents(lyap: LyapunovSpec, beta1: float, beta2: float) -> None:
    """Check the h-exponents of a taming against the class of `lyap`.

    Hat- and bar-subclass functions allow β₁ ≤ 1/2 and β₂ ≤ 1/4; otherwise
    β₁ ≤ 1/2 and β₂ ≤ 1/2 − 1/(p ∧ 4).
    """
    if beta1 > 0.5:
        raise ConfigurationError(f"β₁ ≤ 1/2 violated: β₁={beta1}")
    if lyap.subclass in (LyapunovSubclass.hat, LyapunovSubclass.bar):
        ceiling = 0.25
    else:
        ceiling = 0.5 - 1.0 / min(lyap.p, 4)
    if beta2 > ceiling + 1e-15:
        raise ConfigurationError(f"β₂ ≤ {ceiling:g} violated for {lyap.name}: β₂={beta2}")


def plan_balanced_taming(
    model: SdeModel,
    lyap: LyapunovSpec,
    mu: float,
    beta2: float = 0.25,
    C: Optional[float] = None,
    kappa_star: Optional[float] = None,
) -> TamingPlan:
    """Return the integrability plan for the squared-balance construction.

    Requires κ* ≥ κ − 1, C ≥ (K/μ) ∨ 1 and C² ≥ K/μ. The step-size
    ceiling (μ/K)^{1/β₂} applies when K > μ.
    """
    if not mu > 0:
        raise ConfigurationError(f"μ > 0 violated: μ={mu}")
    growth = model.growth
    beta1 = 2.0 * beta2
    validate_taming_exponents(lyap, beta1, beta2)
    kstar = max(growth.kappa - 1.0, 0.0) if kappa_star is None else kappa_star
    if kstar < growth.kappa - 1.0:
        raise ConfigurationError(f"κ* ≥ κ−1 violated: κ*={kstar}, κ={growth.kappa}")
    c_min = max(growth.K / mu, 1.0, math.sqrt(growth.K / mu))
    scale = c_min if C is None else C
    if scale < c_min:
        raise ConfigurationError(f"C ≥ (K/μ) ∨ 1 violated: C={scale}, K/μ={growth.K / mu:g}")
    h_max = min(1.0, (mu / growth.K) ** (1.0 / beta2)) if growth.K > mu else 1.0
    return TamingPlan(
        purpose=TamingPurpose.integrability, beta1=beta1, beta2=beta2, C=scale, kappa_star=kstar, mu=mu, h_max=h_max
    )


def build_balanced_taming(
    model: SdeModel,
    lyap: LyapunovSpec,
    mu: float,
    beta2: float = 0.25,
    C: Optional[float] = None,
    kappa_star: Optional[float] = None,
) -> TamedCoefficients:
    """Return squared-balance coefficients G_σ = C V^{κ*γ} h^{β₂}, G_b = 2G_σ + G_σ²."""
    plan = plan_balanced_taming(model, lyap, mu, beta2, C, kappa_star)
    exponent = plan.kappa_star * lyap.gamma

    def g_sigma(x: np.ndarray, h: float) -> np.ndarray:
        return plan.C * lyap.value(x) ** exponent * h**plan.beta2

    def g_b(x: np.ndarray, h: float) -> np.ndarray:
        g = g_sigma(x, h)
        return 2.0 * g + g * g

    logger.info(
        "balanced taming on %s: C=%g κ*=%g β₂=%g h_max=%g", model.name, plan.C, plan.kappa_star, beta2, plan.h_max
    )
    return TamedCoefficients(base=model, g_b=g_b, g_sigma=g_sigma, case_i_exact=True, name="balanced")


def plan_stability_taming(model: SdeModel, mu: float, lam: float, h: float, C: Optional[float] = None) -> TamingPlan:
    """Return the almost-sure stability plan with α = 1/4.

    Requires h < (μλ/K)⁴ and C ≥ 1/(μ/K − h^{1/4}/λ).
    """
    K = model.growth.K
    bound = (mu * lam / K) ** 4
    h_max = min(1.0, bound)
    if not h < bound:
        raise ThresholdError(f"h exceeds the almost-sure stability threshold (μλ/K)⁴={bound:g}: h={h}", h, h_max)
    c_min = 1.0 / (mu / K - h**0.25 / lam)
    scale = c_min if C is None else C
    if scale < c_min:
        raise ConfigurationError(f"C ≥ 1/(μ/K − h^(1/4)/λ) violated: C={scale}, bound={c_min:g}")
    return TamingPlan(
        purpose=TamingPurpose.as_stability,
        beta1=0.25,
        beta2=0.25,
        C=scale,
        kappa_star=model.growth.kappa_check - 1.0,
        mu=mu,
        h_max=h_max,
        alpha=0.25,
    )


def build_stability_taming(
    model: SdeModel, lyap: LyapunovSpec, mu: float, lam: float, h: float, C: Optional[float] = None
) -> TamedCoefficients:
    """Return single-G coefficients G(x) = C(U^{(κ₁−1)γ} ∨ U^{(κ₂−1)γ}) with α = 1/4."""
    plan = plan_stability_taming(model, mu, lam, h, C)
    e1 = (model.growth.kappa1 - 1.0) * lyap.gamma
    e2 = (model.growth.kappa2 - 1.0) * lyap.gamma

    def g(x: np.ndarray) -> np.ndarray:
        u = lyap.U(x)
        return plan.C * np.maximum(u**e1, u**e2)

    logger.info("stability taming on %s: C=%g h_max=%g", model.name, plan.C, plan.h_max)
    return TamedCoefficients.single_g(model, g, alpha=plan.alpha, name="stability")


def plan_projected_stability_taming(
    model: SdeModel, lyap: LyapunovSpec, mu: float, r: float, h: float, alpha: float = 0.25, C: Optional[float] = None
) -> TamingPlan:
    """Return the V-exponential stability plan for the composed scheme.

    G(x) = C(1 + |x|^{(κ̌−1)qγ}) with C ≥ Kν^{(κ̌−1)γ}/μ, α ≤ 1/4 and
    r < α/((κ̌−1)qγ). The plan records the discrete-rate factor
    1/(1 + Ch^α + Ch^{α−r(κ̌−1)qγ}).
    """
    growth = model.growth
    if not 0 < alpha <= 0.25:
        raise ConfigurationError(f"α ≤ 1/4 violated: α={alpha}")
    excess = (growth.kappa_check - 1.0) * growth.q * lyap.gamma
    if excess > 0 and not r < alpha / excess:
        raise ConfigurationError(f"r < α/((κ̌−1)qγ) violated: r={r}, bound={alpha / excess:g}")
    c_min = growth.K * growth.nu ** ((growth.kappa_check - 1.0) * lyap.gamma) / mu
    scale = c_min if C is None else C
    if scale < c_min:
        raise ConfigurationError(f"C ≥ Kν^((κ̌−1)γ)/μ violated: C={scale}, bound={c_min:g}")
    factor = 1.0 / (1.0 + scale * h**alpha + scale * h ** (alpha - r * excess))
    return TamingPlan(
        purpose=TamingPurpose.v_exp_stability,
        beta1=alpha,
        beta2=alpha,
        C=scale,
        kappa_star=growth.kappa_check - 1.0,
        mu=mu,
        r=r,
        alpha=alpha,
        rate_factor=factor,
    )


def build_projected_stability_taming(
    model: SdeModel, lyap: LyapunovSpec, mu: float, r: float, h: float, alpha: float = 0.25, C: Optional[float] = None
) -> TamedCoefficients:
    """Return single-G coefficients G(x) = C(1 + |x|^{(κ̌−1)qγ})."""
    plan = plan_projected_stability_taming(model, lyap, mu, r, h, alpha, C)
    growth = model.growth
    excess = (growth.kappa_check - 1.0) * growth.q * lyap.gamma

    def g(x: np.ndarray) -> np.ndarray:
        return plan.C * (1.0 + np.linalg.norm(x, axis=1) ** excess)

    logger.info("projected stability taming on %s: C=%g rate factor=%g", model.name, plan.C, plan.rate_factor)
    return TamedCoefficients.single_g(model, g, alpha=alpha, name="projected-balanced")


def lipschitz_taming(model: SdeModel, degree: float, alpha: float, certified: bool = True) -> TamedCoefficients:
    """Return the drift taming λ^h(x) = λ(x)/(1 + h^α|x|^{m−1}); identity when m ≤ 1.

    The diffusion is left untamed. `certified` records the caller's claim
    that λ^h is Lipschitz with constant μh^{−α}.
    """
    if not 0 <= alpha < 1:
        raise ConfigurationError(f"α ∈ [0,1) violated: α={alpha}")
    power = degree - 1.0

    def g_b(x: np.ndarray, h: float) -> np.ndarray:
        if power <= 0:
            return np.zeros(x.shape[0])
        return h**alpha * np.linalg.norm(x, axis=1) ** power

    def g_sigma(x: np.ndarray, h: float) -> np.ndarray:
        return np.zeros(x.shape[0])

    return TamedCoefficients(
        base=model, g_b=g_b, g_sigma=g_sigma, lipschitz_certificate=certified, name=f"lipschitz m={degree:g}"
    )


def positivity_taming(model: SdeModel, g: Callable[[np.ndarray], np.ndarray], alpha: float) -> TamedCoefficients:
    """Return b^h = b(t,0) + (b − b(t,0))/(1 + Gh^α), σ^h = σ/(1 + Gh^α)."""
    if not 0 <= alpha < 1:
        raise ConfigurationError(f"α ∈ [0,1) violated: α={alpha}")
    return TamedCoefficients.single_g(model, g, alpha=alpha, anchored_at_origin=True, name="positivity")
