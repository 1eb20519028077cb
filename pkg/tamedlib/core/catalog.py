"""Builtin models and Lyapunov functions, addressable by name.

Examples:
    >>> from tamedlib.core.catalog import CATALOG
    >>> CATALOG.model("lorenz").dim_state
    3
    >>> sorted(CATALOG.names("lyapunov"))
    ['norm-power', 'vdp-V', 'weighted-poly']

"""

from collections import UserDict
from dataclasses import dataclass, replace
import logging
from math import sqrt
from typing import Any, Callable, List

import numpy as np

from tamedlib.core.lyapunov import LyapunovSpec, norm_power, vdp_v, weighted_poly
from tamedlib.core.model import GrowthProfile, SdeModel, zero_model
from tamedlib.errors import ConfigurationError

logger = logging.getLogger(__name__)


def cubic() -> SdeModel:
    """Return dX = −|X|²X dt + |X|² dW in one dimension."""

    def drift(t: float, x: np.ndarray) -> np.ndarray:
        return -(x * x) * x

    def diffusion(t: float, x: np.ndarray) -> np.ndarray:
        return (x * x)[:, :, None]

    return SdeModel(
        name="cubic",
        dim_state=1,
        dim_noise=1,
        drift=drift,
        diffusion=diffusion,
        growth=GrowthProfile(K=1.0, kappa=3.0, kappa1=3.0, kappa2=2.0, q1=2.0, q2=2.0, nu=1.0),
        vanishes_at_origin=True,
    )


def lorenz(
    alpha1: float = 1.0, alpha2: float = 1.0, beta1: float = 0.5, beta2: float = 0.5, beta3: float = 0.5
) -> SdeModel:
    """Return the stochastic Lorenz system with multiplicative diagonal noise.

    b(x) = (α₁(x₂ − x₁), −α₁x₁ − x₂ − x₁x₃, x₁x₂ − α₂x₃), σ(x) = diag(β₁x₁, β₂x₂, β₃x₃).

    Raises:
        ConfigurationError: unless 2α₁ > β₁², β₂² < 2 and 2α₂ > β₃²
    """
    if not (2 * alpha1 > beta1**2 and beta2**2 < 2 and 2 * alpha2 > beta3**2):
        raise ConfigurationError(
            f"lorenz guard 2α₁>β₁², β₂²<2, 2α₂>β₃² violated: α=({alpha1}, {alpha2}), β=({beta1}, {beta2}, {beta3})"
        )
    betas = np.array([beta1, beta2, beta3])

    def drift(t: float, x: np.ndarray) -> np.ndarray:
        x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]
        return np.stack([alpha1 * (x2 - x1), -alpha1 * x1 - x2 - x1 * x3, x1 * x2 - alpha2 * x3], axis=1)

    def diffusion(t: float, x: np.ndarray) -> np.ndarray:
        out = np.zeros((x.shape[0], 3, 3))
        idx = np.arange(3)
        out[:, idx, idx] = betas * x
        return out

    # |b| ≤ K₀(|x| + |x|²) and ‖σ‖ ≤ K₀|x|; 1.5 K₀ also covers K(1 + |x|²)
    k0 = max(sqrt(5 * alpha1**2 + 4 * abs(alpha1) + alpha2**2 + 4), float(np.linalg.norm(betas)))
    return SdeModel(
        name="lorenz",
        dim_state=3,
        dim_noise=3,
        drift=drift,
        diffusion=diffusion,
        growth=GrowthProfile(K=1.5 * k0, kappa=2.0, kappa1=2.0, kappa2=1.0, q1=2.0, q2=2.0, nu=2.0),
        vanishes_at_origin=True,
        params={"alpha1": alpha1, "alpha2": alpha2, "beta1": beta1, "beta2": beta2, "beta3": beta3},
    )


def lorenz_rho(
    alpha1: float = 1.0, alpha2: float = 1.0, beta1: float = 0.5, beta2: float = 0.5, beta3: float = 0.5
) -> float:
    """Return the mean-square decay rate (2α₁−β₁²) ∧ (2−β₂²) ∧ (2α₂−β₃²)."""
    return min(2 * alpha1 - beta1**2, 2 - beta2**2, 2 * alpha2 - beta3**2)


def vdp(alpha1: float = 1.0, alpha2: float = 1.0, beta: float = 1.0) -> SdeModel:
    """Return the stochastic Duffing-van der Pol oscillator.

    b(x) = (x₂ − α₁x₁, −α₂x₂ − x₁³); σ is 2×3 with the single entry σ₂₂ = βx₂.

    Raises:
        ConfigurationError: unless α₁ > 0 and 2α₂ > β²
    """
    if not (alpha1 > 0 and 2 * alpha2 > beta**2):
        raise ConfigurationError(f"vdp guard α₁>0, 2α₂>β² violated: α=({alpha1}, {alpha2}), β={beta}")

    def drift(t: float, x: np.ndarray) -> np.ndarray:
        x1, x2 = x[:, 0], x[:, 1]
        return np.stack([x2 - alpha1 * x1, -alpha2 * x2 - x1 * x1 * x1], axis=1)

    def diffusion(t: float, x: np.ndarray) -> np.ndarray:
        out = np.zeros((x.shape[0], 2, 3))
        out[:, 1, 1] = beta * x[:, 1]
        return out

    return SdeModel(
        name="vdp",
        dim_state=2,
        dim_noise=3,
        drift=drift,
        diffusion=diffusion,
        growth=GrowthProfile(
            K=2.0 * (1.0 + alpha1 + alpha2 + abs(beta)), kappa=3.0, kappa1=3.0, kappa2=2.0, q1=4.0, q2=4.0, nu=2.0
        ),
        vanishes_at_origin=True,
        params={"alpha1": alpha1, "alpha2": alpha2, "beta": beta},
    )


def vdp_rho(alpha1: float = 1.0, alpha2: float = 1.0, beta: float = 1.0) -> float:
    """Return the rate ρ with LV ≤ −ρV for V = x₁⁴ + 2x₂².

    LV = −4α₁x₁⁴ − (4α₂ − 2β²)x₂², so ρ = 4α₁ ∧ (4α₂ − 2β²)/2.
    """
    return min(4 * alpha1, (4 * alpha2 - 2 * beta**2) / 2)


def gbm(mu: float = 0.1, sigma: float = 0.3) -> SdeModel:
    """Return geometric Brownian motion dX = μX dt + σX dW."""

    def drift(t: float, x: np.ndarray) -> np.ndarray:
        return mu * x

    def diffusion(t: float, x: np.ndarray) -> np.ndarray:
        return (sigma * x)[:, :, None]

    return SdeModel(
        name="gbm",
        dim_state=1,
        dim_noise=1,
        drift=drift,
        diffusion=diffusion,
        growth=GrowthProfile(K=max(abs(mu), abs(sigma), 1e-12)),
        vanishes_at_origin=True,
        params={"mu": mu, "sigma": sigma},
    )


@dataclass(frozen=True)
class ComparisonPair:
    """Two scalar SDEs with drifts ν ≤ λ and a shared diffusion.

    Attributes:
        lower: the model with drift ν
        upper: the model with drift λ
    """

    lower: SdeModel
    upper: SdeModel


def linear_pair(nu: float = 0.1, lam: float = 0.2, sigma: float = 0.3) -> ComparisonPair:
    """Return the pair dX = νX dt + σX dW, dY = λY dt + σY dW."""
    if nu > lam:
        raise ConfigurationError(f"comparison pair needs ν ≤ λ: ν={nu}, λ={lam}")
    lower = gbm(nu, sigma)
    upper = gbm(lam, sigma)
    return ComparisonPair(
        lower=replace(lower, name="linear-pair-lower"),
        upper=replace(upper, name="linear-pair-upper"),
    )


@dataclass(frozen=True)
class CatalogEntry:
    """A named builtin.

    Attributes:
        name: the lookup key used by configs
        kind: "model", "pair" or "lyapunov"
        factory: builds the object from keyword parameters
        description: one line for listings
    """

    name: str
    kind: str
    factory: Callable[..., Any]
    description: str

    def __repr__(self) -> str:
        return f"<CatalogEntry: {self.kind} {self.name}>"


class BuiltinCatalog(UserDict):
    """The builtin models, comparison pairs and Lyapunov functions, keyed by name."""

    def __init__(self) -> None:
        super().__init__()
        for entry in (
            CatalogEntry("cubic", "model", cubic, "dX = −|X|²X dt + |X|² dW, almost surely stable"),
            CatalogEntry("lorenz", "model", lorenz, "stochastic Lorenz system, mean-square stable"),
            CatalogEntry("vdp", "model", vdp, "stochastic Duffing-van der Pol oscillator"),
            CatalogEntry("gbm", "model", gbm, "geometric Brownian motion"),
            CatalogEntry("zero", "model", zero_model, "b ≡ 0, σ ≡ 0"),
            CatalogEntry("linear-pair", "pair", linear_pair, "νX vs λX with common σX, for comparison"),
            CatalogEntry("norm-power", "lyapunov", norm_power, "|x|^p"),
            CatalogEntry("weighted-poly", "lyapunov", weighted_poly, "Σ cᵢ xᵢ^{pᵢ}"),
            CatalogEntry("vdp-V", "lyapunov", vdp_v, "x₁⁴ + 2x₂²"),
        ):
            self.data[entry.name] = entry

    def names(self, kind: str) -> List[str]:
        """Return the names of all entries of `kind`."""
        return [name for name, entry in self.data.items() if entry.kind == kind]

    def _build(self, name: str, kind: str, params: Any) -> Any:
        if name not in self.data or self.data[name].kind != kind:
            raise ConfigurationError(f"unknown {kind} {name!r}; known: {self.names(kind)}")
        try:
            return self.data[name].factory(**params)
        except TypeError as exc:
            raise ConfigurationError(f"bad parameters for {kind} {name!r}: {exc}") from exc

    def model(self, name: str, **params: Any) -> SdeModel:
        """Build the builtin model `name`."""
        result: SdeModel = self._build(name, "model", params)
        return result

    def pair(self, name: str, **params: Any) -> ComparisonPair:
        """Build the builtin comparison pair `name`."""
        result: ComparisonPair = self._build(name, "pair", params)
        return result

    def lyapunov(self, name: str, **params: Any) -> LyapunovSpec:
        """Build the builtin Lyapunov function `name`."""
        result: LyapunovSpec = self._build(name, "lyapunov", params)
        return result


CATALOG = BuiltinCatalog()
