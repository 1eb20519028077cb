"""SDE models dX = b(t, X) dt + σ(t, X) dW with growth metadata.

Evaluators are batched: `drift(t, x)` takes an `(n, d)` array and returns
`(n, d)`; `diffusion(t, x)` returns `(n, d, m)`. Use `as_batch` to lift a
single point.

Examples:
    >>> import numpy as np
    >>> from tamedlib.core import catalog
    >>> cubic = catalog.cubic()
    >>> cubic.evaluate_drift(0.0, np.array([2.0]))
    array([-8.])
    >>> cubic.evaluate_diffusion(0.0, np.array([2.0]))
    array([[4.]])

"""

from dataclasses import dataclass, field
import logging
from typing import Callable, Mapping, Optional, Tuple

import numpy as np

from tamedlib.errors import ConfigurationError, DomainViolationError

logger = logging.getLogger(__name__)

DriftFn = Callable[[float, np.ndarray], np.ndarray]
DiffusionFn = Callable[[float, np.ndarray], np.ndarray]


def as_batch(x: np.ndarray, dim: int) -> Tuple[np.ndarray, bool]:
    """Return `x` as an `(n, dim)` float array, and whether it was a single point."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim == 1:
        assert arr.shape[0] == dim, f"Point has {arr.shape[0]} components, expected {dim}"
        return arr.reshape(1, dim), True
    assert arr.ndim == 2 and arr.shape[1] == dim, f"Batch has shape {arr.shape}, expected (n, {dim})"
    return arr, False


def ensure_finite(values: np.ndarray, x: np.ndarray, what: str) -> np.ndarray:
    """Raise DomainViolationError if `values` holds a non-finite entry for a finite input row."""
    bad = ~np.isfinite(values.reshape(values.shape[0], -1)).all(axis=1)
    if bad.any():
        offending = x[bad & np.isfinite(x).all(axis=1)]
        if offending.shape[0]:
            raise DomainViolationError(f"{what} is not finite at {offending[:3].tolist()}", x=offending)
    return values


@dataclass(frozen=True)
class GrowthProfile:
    """Polynomial growth metadata of the coefficients.

    Integrability form: |b| ∨ ‖σ‖ ≤ K(1 + V^{κγ}). Stability form:
    |b| ≤ K U^{κ₁γ} and ‖σ‖ ≤ K U^{κ₂γ}, with U ≤ ν(1 + |x|^q).

    Attributes:
        K: growth constant
        kappa: integrability exponent κ ≥ 1
        kappa1: drift exponent in the stability form
        kappa2: diffusion exponent in the stability form
        q1: polynomial degree of U used with the drift
        q2: polynomial degree of U used with the diffusion
        nu: constant ν in U ≤ ν(1 + |x|^q)
    """

    K: float
    kappa: float = 1.0
    kappa1: float = 1.0
    kappa2: float = 1.0
    q1: float = 2.0
    q2: float = 2.0
    nu: float = 1.0

    def __post_init__(self) -> None:
        if not self.K > 0:
            raise ConfigurationError(f"K > 0 violated: K={self.K}")
        for name in ("kappa", "kappa1", "kappa2"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} ≥ 1 violated: {getattr(self, name)}")
        if not self.nu > 0:
            raise ConfigurationError(f"nu > 0 violated: nu={self.nu}")

    @property
    def kappa_check(self) -> float:
        """Return κ̌ = κ₁ ∨ κ₂."""
        return max(self.kappa1, self.kappa2)

    @property
    def q(self) -> float:
        """Return the degree of U used in projection exponent rules."""
        return max(self.q1, self.q2)


@dataclass(frozen=True)
class SdeModel:
    """An SDE with batched coefficient evaluators.

    Attributes:
        name: a short identifier
        dim_state: d
        dim_noise: m
        drift: (t, x[n, d]) -> [n, d]
        diffusion: (t, x[n, d]) -> [n, d, m]
        growth: growth metadata
        time_homogeneous: coefficients do not depend on t
        vanishes_at_origin: b(t, 0) = 0 and σ(t, 0) = 0 for all t
        domain_radius: radius of the ball on which sampled checks run
        params: the parameters a builtin was built with
    """

    name: str
    dim_state: int
    dim_noise: int
    drift: DriftFn
    diffusion: DiffusionFn
    growth: GrowthProfile
    time_homogeneous: bool = True
    vanishes_at_origin: bool = False
    domain_radius: float = 10.0
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dim_state < 1 or self.dim_noise < 1:
            raise ConfigurationError(f"dimensions must be positive: d={self.dim_state}, m={self.dim_noise}")

    def __repr__(self) -> str:
        return f"<SdeModel: {self.name} d={self.dim_state} m={self.dim_noise}>"

    def evaluate_drift(self, t: float, x: np.ndarray) -> np.ndarray:
        """Return b(t, x) for a point or batch, raising on non-finite values."""
        batch, single = as_batch(x, self.dim_state)
        values = ensure_finite(np.asarray(self.drift(t, batch), dtype=float), batch, f"{self.name} drift")
        return values[0] if single else values

    def evaluate_diffusion(self, t: float, x: np.ndarray) -> np.ndarray:
        """Return σ(t, x) for a point or batch, raising on non-finite values."""
        batch, single = as_batch(x, self.dim_state)
        values = ensure_finite(np.asarray(self.diffusion(t, batch), dtype=float), batch, f"{self.name} diffusion")
        return values[0] if single else values

    def check_origin(self, times: np.ndarray) -> bool:
        """Return True if b(t, 0) = 0 and σ(t, 0) = 0 at every t in `times`."""
        origin = np.zeros((1, self.dim_state))
        for t in np.asarray(times, dtype=float):
            if np.any(self.drift(float(t), origin) != 0) or np.any(self.diffusion(float(t), origin) != 0):
                return False
        return True

    def growth_ratio(self, value: Callable[[np.ndarray], np.ndarray], gamma: float, samples: np.ndarray) -> float:
        """Return max over samples of (|b| ∨ ‖σ‖) / (K(1 + V^{κγ})).

        A result ≤ 1 means the integrability growth form holds on the samples.
        """
        b = np.linalg.norm(self.drift(0.0, samples), axis=1)
        s = np.linalg.norm(self.diffusion(0.0, samples).reshape(samples.shape[0], -1), axis=1)
        bound = self.growth.K * (1.0 + value(samples) ** (self.growth.kappa * gamma))
        return float(np.max(np.maximum(b, s) / bound))


def zero_model(dim_state: int = 1, dim_noise: int = 1) -> SdeModel:
    """Return the model with b ≡ 0 and σ ≡ 0."""

    def drift(t: float, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(x)

    def diffusion(t: float, x: np.ndarray) -> np.ndarray:
        return np.zeros((x.shape[0], dim_state, dim_noise))

    return SdeModel(
        name="zero",
        dim_state=dim_state,
        dim_noise=dim_noise,
        drift=drift,
        diffusion=diffusion,
        growth=GrowthProfile(K=1.0),
        vanishes_at_origin=True,
    )


def describe(model: SdeModel, lyapunov: Optional[object] = None) -> str:
    """Return a one-line description used in logs."""
    g = model.growth
    text = f"{model.name} (d={model.dim_state}, m={model.dim_noise}, K={g.K:g}, κ={g.kappa:g}, κ̌={g.kappa_check:g})"
    if lyapunov is not None:
        text += f" with V={getattr(lyapunov, 'name', lyapunov)}"
    return text
