"""Lyapunov functions with analytic derivatives.

A `LyapunovSpec` belongs to the class V^p_γ when its derivatives satisfy
‖V^{(s)}(x)‖_HS ≤ c(1 + V(x))^{1−sγ} for s ≤ p. Derivatives are supplied in
closed form per family; finite differences only serve as a test oracle
(see `tamedlib.core.operator.finite_difference_check`).

Families:

* `norm_power(p)`: |x|^p, the bar subclass for even p
* `weighted_poly(coeffs, powers)`: Σ cᵢ xᵢ^{pᵢ}, the hat subclass
* `vdp_v()`: x₁⁴ + 2x₂², used with the van der Pol oscillator

Examples:
    >>> import numpy as np
    >>> V = norm_power(2)
    >>> float(V.value(np.array([[3.0, 4.0]]))[0])
    25.0
    >>> V.c, V.gamma
    (2.0, 0.5)

"""

from dataclasses import dataclass, replace
from enum import Enum
import logging
from math import factorial, sqrt
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from tamedlib.core.sampling import SampleSpec
from tamedlib.errors import ConfigurationError

logger = logging.getLogger(__name__)

ScalarFn = Callable[[np.ndarray], np.ndarray]
HigherFn = Callable[[np.ndarray, int], np.ndarray]


class LyapunovSubclass(str, Enum):
    """Subclasses of V^p_γ."""

    general = "general"
    # V^{(p+1)} ≡ 0
    hat = "hat"
    # |x|^p-like
    bar = "bar"


@dataclass(frozen=True)
class LyapunovSpec:
    """A Lyapunov function with batched analytic derivatives.

    Attributes:
        name: a short identifier
        value: x[n, d] -> [n], non-negative
        gradient: x[n, d] -> [n, d]
        hessian: x[n, d] -> [n, d, d]
        p: order of the derivative bounds
        gamma: exponent in (0, 1/p]
        c: derivative-bound constant
        subclass: which subclass of V^p_γ
        higher_derivative_hs_norm: optional (x, s) -> [n] for 3 ≤ s ≤ p
        dominating_U: optional U with V ≤ U; defaults to V itself
        monotone_radial: V(x) ≤ V(y) whenever |x| ≤ |y|
    """

    name: str
    value: ScalarFn
    gradient: ScalarFn
    hessian: ScalarFn
    p: int
    gamma: float
    c: float
    subclass: LyapunovSubclass = LyapunovSubclass.general
    higher_derivative_hs_norm: Optional[HigherFn] = None
    dominating_U: Optional[ScalarFn] = None
    monotone_radial: bool = False

    def __post_init__(self) -> None:
        if self.p < 2:
            raise ConfigurationError(f"p ≥ 2 violated: p={self.p}")
        if not 0 < self.gamma <= 1.0 / self.p + 1e-12:
            raise ConfigurationError(f"γ ∈ (0, 1/p] violated: γ={self.gamma}, p={self.p}")
        if not self.c > 0:
            raise ConfigurationError(f"c > 0 violated: c={self.c}")

    def __repr__(self) -> str:
        return f"<LyapunovSpec: {self.name} p={self.p} γ={self.gamma:g} c={self.c:g}>"

    def U(self, x: np.ndarray) -> np.ndarray:
        """Return the dominating function, or V when none was supplied."""
        return self.dominating_U(x) if self.dominating_U is not None else self.value(x)

    def derivative_norm(self, x: np.ndarray, s: int) -> Optional[np.ndarray]:
        """Return ‖V^{(s)}(x)‖_HS, or None when the s-th derivative is not available."""
        if s == 0:
            return self.value(x)
        if s == 1:
            return np.linalg.norm(self.gradient(x), axis=1)
        if s == 2:
            return np.linalg.norm(self.hessian(x).reshape(x.shape[0], -1), axis=1)
        if self.higher_derivative_hs_norm is None:
            return None
        return self.higher_derivative_hs_norm(x, s)


def derivative_ratios(lyap: LyapunovSpec, samples: np.ndarray, c: Optional[float] = None) -> Dict[int, Optional[float]]:
    """Return, for 1 ≤ s ≤ p, max over samples of ‖V^{(s)}‖_HS / (c(1+V)^{1−sγ}).

    Orders whose derivative is unavailable map to None ("not verified").
    With `c=1` the ratios are candidate values for c itself.
    """
    scale = lyap.c if c is None else c
    one_plus_v = 1.0 + lyap.value(samples)
    ratios: Dict[int, Optional[float]] = {}
    for s in range(1, lyap.p + 1):
        norm = lyap.derivative_norm(samples, s)
        if norm is None:
            ratios[s] = None
            continue
        ratios[s] = float(np.max(norm / (scale * one_plus_v ** (1.0 - s * lyap.gamma))))
    return ratios


def estimate_c(lyap: LyapunovSpec, sample_spec: Optional[SampleSpec] = None, dim: int = 1) -> float:
    """Return a candidate c: the largest sampled derivative ratio over the available orders."""
    spec = sample_spec or SampleSpec()
    ratios = derivative_ratios(lyap, spec.points(dim), c=1.0)
    known = [r for r in ratios.values() if r is not None]
    missing = [s for s, r in ratios.items() if r is None]
    if missing:
        logger.info("estimate_c for %s: orders %s not verified", lyap.name, missing)
    return max(known)


def _radius(x: np.ndarray) -> np.ndarray:
    return np.linalg.norm(x, axis=1)


def norm_power(p: int, c: Optional[float] = None, dim: int = 1) -> LyapunovSpec:
    """Return V(x) = |x|^p with γ = 1/p.

    Higher derivatives are supplied in closed form for p = 2 and p = 4.
    When `c` is not given it is the exact supremum for those p and a
    sampled estimate otherwise.
    """
    if p < 2:
        raise ConfigurationError(f"p ≥ 2 violated: p={p}")
    pf = float(p)

    def value(x: np.ndarray) -> np.ndarray:
        return _radius(x) ** pf

    def gradient(x: np.ndarray) -> np.ndarray:
        r = _radius(x)
        scale = pf * r ** (pf - 2)
        return scale[:, None] * x

    def hessian(x: np.ndarray) -> np.ndarray:
        n, d = x.shape
        r = _radius(x)
        eye = np.broadcast_to(np.eye(d), (n, d, d))
        if p == 2:
            return 2.0 * eye.copy()
        safe = np.where(r > 0, r, 1.0)
        outer = np.einsum("ni,nj->nij", x, x)
        radial = np.where(r > 0, pf * (pf - 2) * safe ** (pf - 4), 0.0)
        return pf * (r ** (pf - 2))[:, None, None] * eye + radial[:, None, None] * outer

    def quadratic_higher(x: np.ndarray, s: int) -> np.ndarray:
        return np.zeros(x.shape[0])

    def quartic_higher(x: np.ndarray, s: int) -> np.ndarray:
        d = x.shape[1]
        if s == 3:
            return 8.0 * _radius(x) * sqrt(3 * d + 6)
        if s == 4:
            return np.full(x.shape[0], 8.0 * sqrt(3 * d * d + 6 * d))
        return np.zeros(x.shape[0])

    higher: Optional[HigherFn] = {2: quadratic_higher, 4: quartic_higher}.get(p)
    if c is None:
        if p == 2:
            c = 2.0 * sqrt(dim)
        elif p == 4:
            c = 8.0 * sqrt(3 * dim * dim + 6 * dim)
    spec = LyapunovSpec(
        name=f"norm-power-{p}",
        value=value,
        gradient=gradient,
        hessian=hessian,
        p=p,
        gamma=1.0 / pf,
        c=c if c is not None else 1.0,
        subclass=LyapunovSubclass.bar if p % 2 == 0 else LyapunovSubclass.general,
        higher_derivative_hs_norm=higher,
        monotone_radial=True,
    )
    if c is None:
        spec = _with_c(spec, estimate_c(spec, dim=dim))
    return spec


def weighted_poly(coeffs: Sequence[float], powers: Sequence[int], c: Optional[float] = None) -> LyapunovSpec:
    """Return V(x) = Σ cᵢ xᵢ^{pᵢ} for positive cᵢ and even pᵢ ≥ 2.

    p is the largest power and γ = 1/p. All derivatives are diagonal
    tensors, so every order is available in closed form.
    """
    if len(coeffs) != len(powers) or not coeffs:
        raise ConfigurationError("weighted-poly needs one power per coefficient")
    if any(ci <= 0 for ci in coeffs):
        raise ConfigurationError(f"weighted-poly coefficients must be positive: {list(coeffs)}")
    if any(pi < 2 or pi % 2 for pi in powers):
        raise ConfigurationError(f"weighted-poly powers must be even and ≥ 2: {list(powers)}")
    cs = np.asarray(coeffs, dtype=float)
    ps = np.asarray(powers, dtype=int)
    dim = len(cs)

    def coefficient_of_order(s: int) -> np.ndarray:
        # cᵢ pᵢ!/(pᵢ−s)!, zero where s > pᵢ
        return np.array([ci * factorial(pi) / factorial(pi - s) if s <= pi else 0.0 for ci, pi in zip(cs, ps)])

    def diagonal(x: np.ndarray, s: int) -> np.ndarray:
        exps = np.maximum(ps - s, 0)
        return coefficient_of_order(s) * x**exps

    def value(x: np.ndarray) -> np.ndarray:
        return np.sum(cs * x**ps, axis=1)

    def gradient(x: np.ndarray) -> np.ndarray:
        return diagonal(x, 1)

    def hessian(x: np.ndarray) -> np.ndarray:
        diag = diagonal(x, 2)
        out = np.zeros((x.shape[0], dim, dim))
        idx = np.arange(dim)
        out[:, idx, idx] = diag
        return out

    def higher(x: np.ndarray, s: int) -> np.ndarray:
        return np.linalg.norm(diagonal(x, s), axis=1)

    p = int(ps.max())
    spec = LyapunovSpec(
        name="weighted-poly",
        value=value,
        gradient=gradient,
        hessian=hessian,
        p=p,
        gamma=1.0 / p,
        c=c if c is not None else 1.0,
        subclass=LyapunovSubclass.hat,
        higher_derivative_hs_norm=higher,
        monotone_radial=bool(np.all(ps == ps[0]) and np.all(cs == cs[0])),
    )
    if c is None:
        spec = _with_c(spec, estimate_c(spec, dim=dim))
    return spec


def vdp_v(c: Optional[float] = None) -> LyapunovSpec:
    """Return V(x) = x₁⁴ + 2x₂²."""
    spec = weighted_poly((1.0, 2.0), (4, 2), c=c)
    return _renamed(spec, "vdp-V")


def lyapunov_sum(first: LyapunovSpec, second: LyapunovSpec) -> LyapunovSpec:
    """Return V₁ + V₂ with derivatives added term by term.

    The result keeps the smaller γ and p and adds the constants; higher
    derivatives are dropped.
    """
    return LyapunovSpec(
        name=f"{first.name}+{second.name}",
        value=lambda x: first.value(x) + second.value(x),
        gradient=lambda x: first.gradient(x) + second.gradient(x),
        hessian=lambda x: first.hessian(x) + second.hessian(x),
        p=min(first.p, second.p),
        gamma=min(first.gamma, second.gamma),
        c=first.c + second.c,
    )


def _with_c(spec: LyapunovSpec, c: float) -> LyapunovSpec:
    return replace(spec, c=c)


def _renamed(spec: LyapunovSpec, name: str) -> LyapunovSpec:
    return replace(spec, name=name)
