"""Projection exponents, step-size ceilings, and the constants ρ̃ and μ.

Strict inequalities (μ <, r <, h <) are returned as their supremum; the
`slack` factor (default 0.9) picks an interior point where a concrete
value is needed.

Examples:
    >>> compute_mu_threshold(c=2.0, p=2, d=1)
    1.0
    >>> round(compute_rho_tilde(c=2.0, p=4, d=1, mu=0.1, mode="exact_sum"), 10)
    0.01205

"""

from dataclasses import dataclass, field
from enum import Enum
import logging
import math
from typing import Any, Dict, Optional, Union

import numpy as np
from scipy import optimize

from tamedlib.core.lyapunov import LyapunovSpec
from tamedlib.core.model import GrowthProfile
from tamedlib.errors import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_SLACK = 0.9


class ProjectionPurpose(str, Enum):
    """Which result the projection exponent serves."""

    # r ≤ β₂/((κ−1)qγ)
    integrability = "integrability"
    # r < 1/(2(κ−1))
    l2_rate = "l2_rate"
    # r < 1/(4(κ̌−1)qγ)
    stab2 = "stab2"
    # r < 1/(2(κ₁−1)qγ) ∧ 1/(4(κ₂−1)qγ)
    stab2_refined = "stab2_refined"
    # r < α/((κ̌−1)qγ)
    projected_balanced = "projected_balanced"
    # r < 1/(4(κ̌−1)qγ)
    projected_as_stability = "projected_as_stability"


@dataclass(frozen=True)
class ProjectionExponent:
    """A projection exponent with its provenance.

    Attributes:
        r: the exponent to use; infinite when unconstrained
        bound: the supremum from the rule
        slack: factor applied for a strict bound
        unconstrained: κ = 1, no projection needed
        purpose: the rule applied
    """

    r: float
    bound: float
    slack: float
    unconstrained: bool
    purpose: ProjectionPurpose


def _reciprocal(value: float) -> float:
    return math.inf if value <= 0 else 1.0 / value


def derive_projection_exponent(
    purpose: Union[ProjectionPurpose, str],
    lyap: LyapunovSpec,
    growth: GrowthProfile,
    beta2: float = 0.25,
    alpha: float = 0.25,
    slack: float = DEFAULT_SLACK,
) -> ProjectionExponent:
    """Return the binding projection exponent for `purpose`."""
    purpose = ProjectionPurpose(purpose)
    q, gamma = growth.q, lyap.gamma
    strict = True
    if purpose is ProjectionPurpose.integrability:
        bound = beta2 * _reciprocal((growth.kappa - 1.0) * q * gamma)
        strict = False
    elif purpose is ProjectionPurpose.l2_rate:
        bound = _reciprocal(2.0 * (growth.kappa - 1.0))
    elif purpose in (ProjectionPurpose.stab2, ProjectionPurpose.projected_as_stability):
        bound = _reciprocal(4.0 * (growth.kappa_check - 1.0) * q * gamma)
    elif purpose is ProjectionPurpose.stab2_refined:
        bound = min(
            _reciprocal(2.0 * (growth.kappa1 - 1.0) * q * gamma),
            _reciprocal(4.0 * (growth.kappa2 - 1.0) * q * gamma),
        )
    else:
        bound = alpha * _reciprocal((growth.kappa_check - 1.0) * q * gamma)
    if math.isinf(bound):
        logger.info("projection exponent for %s is unconstrained", purpose.value)
        return ProjectionExponent(r=math.inf, bound=math.inf, slack=slack, unconstrained=True, purpose=purpose)
    r = slack * bound if strict else bound
    return ProjectionExponent(r=r, bound=bound, slack=slack if strict else 1.0, unconstrained=False, purpose=purpose)


class RhoTildeMode(str, Enum):
    """Forms of the constant ρ̃."""

    remark = "remark"
    exact_sum = "exact_sum"
    general = "general"


def _phi(s: int, d: int) -> float:
    return d ** (s - 1) / math.factorial(s // 2) ** 2


def compute_rho_tilde(
    c: float,
    p: int,
    d: int,
    mu: float,
    mode: Union[RhoTildeMode, str] = RhoTildeMode.remark,
    gamma: Optional[float] = None,
    m: Optional[int] = None,
) -> float:
    """Return the growth constant ρ̃ added to ρ in the V-integrability bound.

    * remark: c(p−1)d^{p−1}μ², for μ ≤ 1
    * exact_sum: cμ²/2 + cΣ_{s=3}^{p} φ_s μ^s, φ_s = d^{s−1}/(⌊s/2⌋!)²
    * general: ½cμ² + cΣ_{s=3}^{p−1} φ_s μ^s + 2cμ^p ψ̃,
      ψ̃ = (d(m+1))^{1/γ−1}(2c)^{1/γ−p}/(p−1)!
    """
    mode = RhoTildeMode(mode)
    if mu < 0:
        raise ConfigurationError(f"μ ≥ 0 violated: μ={mu}")
    if mode is RhoTildeMode.remark:
        if mu > 1:
            raise ConfigurationError(f"μ ≤ 1 violated in remark mode: μ={mu}")
        return c * (p - 1) * d ** (p - 1) * mu**2
    if mode is RhoTildeMode.exact_sum:
        return c * mu**2 / 2 + c * sum(_phi(s, d) * mu**s for s in range(3, p + 1))
    if gamma is None or m is None:
        raise ConfigurationError("general mode of ρ̃ needs γ and m")
    psi = (d * (m + 1)) ** (1.0 / gamma - 1.0) * (2.0 * c) ** (1.0 / gamma - p) / math.factorial(p - 1)
    return 0.5 * c * mu**2 + c * sum(_phi(s, d) * mu**s for s in range(3, p)) + 2.0 * c * mu**p * psi


def compute_mu_threshold(c: float, p: int, d: int, rho: Optional[float] = None) -> float:
    """Return the strict upper bound on μ for the stability guarantees.

    1/√(c/2 + c d^{p−1}(p−2)) for almost-sure stability, √ρ times that for
    V-exponential stability with rate ρ.
    """
    if p < 2:
        raise ConfigurationError(f"p ≥ 2 violated: p={p}")
    denom = c / 2 + c * d ** (p - 1) * (p - 2)
    base = 1.0 / math.sqrt(denom)
    return base if rho is None else math.sqrt(rho) * base


class HPurpose(str, Enum):
    """Which result a step-size ceiling comes from."""

    integrability_balanced = "integrability_balanced"
    as_stability = "as_stability"
    v_exp_projected = "v_exp_projected"
    projected_as_stability = "projected_as_stability"
    positivity = "positivity"
    comparison = "comparison"


@dataclass(frozen=True)
class HThreshold:
    """A step-size ceiling.

    Attributes:
        h_max: supremum of admissible h in [0, 1]; 0 when none exists
        purpose: the rule applied
        detail: intermediate quantities, for logs and reports
    """

    h_max: float
    purpose: HPurpose
    detail: Dict[str, float] = field(default_factory=dict)

    def admits(self, h: float) -> bool:
        return 0 < h < self.h_max or (self.h_max == 1.0 and h == 1.0)


def positivity_lhs(h: Union[float, np.ndarray], alpha: float) -> Union[float, np.ndarray]:
    """Return h^{1−α} + h^{(1−α)/2}√(2|log h|)."""
    return h ** (1 - alpha) + h ** ((1 - alpha) / 2) * np.sqrt(2 * np.abs(np.log(h)))


def positivity_threshold(mu: float, alpha: float) -> HThreshold:
    """Return the first h where h^{1−α} + h^{(1−α)/2}A_h reaches 1/μ.

    The left side rises from 0, peaks, and falls back to 1 as h → 1. The
    threshold is the crossing on the rising branch, found by bisection to
    relative 1e−10; it is 1 when the peak stays below 1/μ.
    """
    if mu <= 0:
        raise ConfigurationError(f"μ > 0 violated: μ={mu}")
    if not 0 <= alpha < 1:
        raise ConfigurationError(f"α ∈ [0,1) violated: α={alpha}")
    target = 1.0 / mu
    lo = 1e-12
    grid = np.logspace(-12, math.log10(1 - 1e-9), 4001)
    values = positivity_lhs(grid, alpha)
    peak_index = int(np.argmax(values))
    peak = float(grid[peak_index])
    detail = {"mu": mu, "alpha": alpha, "peak_h": peak, "peak_value": float(values[peak_index])}
    if values[peak_index] <= target:
        return HThreshold(h_max=1.0, purpose=HPurpose.positivity, detail=detail)
    if positivity_lhs(lo, alpha) > target:
        return HThreshold(h_max=0.0, purpose=HPurpose.positivity, detail=detail)
    root = optimize.bisect(lambda h: float(positivity_lhs(h, alpha)) - target, lo, peak, xtol=1e-15, rtol=1e-10)
    return HThreshold(h_max=float(root), purpose=HPurpose.positivity, detail=detail)


def derive_h_threshold(purpose: Union[HPurpose, str], **params: Any) -> HThreshold:
    """Return the step-size ceiling for `purpose`.

    Parameters by purpose:

    * integrability_balanced: mu, K, beta2
    * as_stability: mu, lam, K
    * v_exp_projected: mu, K, nu, kappa_check, gamma, q, r
    * projected_as_stability: mu, lam, K, nu, kappa_check, gamma, q, r
    * positivity, comparison: mu, alpha
    """
    purpose = HPurpose(purpose)
    try:
        if purpose in (HPurpose.positivity, HPurpose.comparison):
            result = positivity_threshold(params["mu"], params["alpha"])
            return HThreshold(h_max=result.h_max, purpose=purpose, detail=result.detail)
        if purpose is HPurpose.integrability_balanced:
            mu, K = params["mu"], params["K"]
            h_max = 1.0 if K <= mu else (mu / K) ** (1.0 / params["beta2"])
            return HThreshold(h_max=min(1.0, h_max), purpose=purpose, detail={"mu": mu, "K": K})
        if purpose is HPurpose.as_stability:
            h_max = (params["mu"] * params["lam"] / params["K"]) ** 4
            return HThreshold(h_max=min(1.0, h_max), purpose=purpose, detail=dict(params))
        excess = (params["kappa_check"] - 1.0) * params["q"] * params["gamma"]
        beta = 0.25 - params["r"] * excess
        detail = {**params, "beta": beta}
        if beta <= 0:
            logger.warning("no admissible h for %s: β = %g ≤ 0", purpose.value, beta)
            return HThreshold(h_max=0.0, purpose=purpose, detail=detail)
        nu_term = params["nu"] ** ((params["kappa_check"] - 1.0) * params["gamma"])
        if purpose is HPurpose.v_exp_projected:
            base = params["mu"] / (2.0 * params["K"] * nu_term)
        else:
            base = params["mu"] * params["lam"] / (params["K"] + 2.0 * params["lam"] * params["K"] * nu_term)
        return HThreshold(h_max=min(1.0, base ** (1.0 / beta)), purpose=purpose, detail=detail)
    except KeyError as exc:
        raise ConfigurationError(f"h threshold for {purpose.value} needs parameter {exc}") from exc


def choose_step(h_max: float, slack: float = DEFAULT_SLACK, below_one: bool = False) -> float:
    """Return the largest dyadic step 2^{−k} ≤ slack·h_max (strictly below 1 if `below_one`).

    Examples:
        >>> choose_step(0.0072)
        0.00390625
    """
    if not h_max > 0:
        raise ConfigurationError(f"no admissible step size: h_max={h_max}")
    k = max(0, math.ceil(-math.log2(slack * h_max)))
    if below_one and k == 0:
        k = 1
    return 2.0**-k
