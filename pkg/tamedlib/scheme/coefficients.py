"""Tamed coefficients in balanced form.

    b^h(t, x) = b(t, x) / (1 + G_b(x, h)),   σ^h(t, x) = σ(t, x) / (1 + G_σ(x, h))

`case_i_exact` asserts 1 + G_b = (1 + G_σ)² identically. The positivity form
anchors the drift at the origin instead:
b^h = b(t, 0) + (b(t, x) − b(t, 0)) / (1 + G_b).

Examples:
    >>> import numpy as np
    >>> from tamedlib.core import catalog
    >>> tamed = TamedCoefficients.single_g(catalog.cubic(), lambda x: 2 * x[:, 0] ** 2, alpha=1.0)
    >>> tamed.drift(0.0, np.array([[1.0]]), 1.0)
    array([[-0.33333333]])

"""

from dataclasses import dataclass
import logging
from typing import Callable, Optional

import numpy as np

from tamedlib.core.model import SdeModel

logger = logging.getLogger(__name__)

# (x[n, d], h) -> [n], non-negative
GFn = Callable[[np.ndarray, float], np.ndarray]


def _zero(x: np.ndarray, h: float) -> np.ndarray:
    return np.zeros(x.shape[0])


@dataclass(frozen=True)
class TamedCoefficients:
    """Balanced tamed coefficients built on a base model.

    Attributes:
        base: the untamed model
        g_b: drift taming function G_b(x, h) ≥ 0
        g_sigma: diffusion taming function G_σ(x, h) ≥ 0
        case_i_exact: 1 + G_b = (1 + G_σ)² holds by construction
        anchored_at_origin: use the positivity form of the drift
        lipschitz_certificate: the caller vouches that the tamed drift is
            Lipschitz with constant μh^{−α}; required by the comparison run
        name: a label for logs and reports
    """

    base: SdeModel
    g_b: GFn
    g_sigma: GFn
    case_i_exact: bool = False
    anchored_at_origin: bool = False
    lipschitz_certificate: bool = False
    name: str = "balanced"

    def __repr__(self) -> str:
        return f"<TamedCoefficients: {self.name} on {self.base.name}>"

    def drift(self, t: float, x: np.ndarray, h: float) -> np.ndarray:
        """Return b^h(t, x) for a batch `x`."""
        b = np.asarray(self.base.drift(t, x), dtype=float)
        denom = (1.0 + self.g_b(x, h))[:, None]
        if not self.anchored_at_origin:
            return b / denom
        b0 = np.asarray(self.base.drift(t, np.zeros((1, x.shape[1]))), dtype=float)
        return b0 + (b - b0) / denom

    def diffusion(self, t: float, x: np.ndarray, h: float) -> np.ndarray:
        """Return σ^h(t, x) for a batch `x`."""
        sigma = np.asarray(self.base.diffusion(t, x), dtype=float)
        return sigma / (1.0 + self.g_sigma(x, h))[:, None, None]

    def case_i_deviation(self, x: np.ndarray, h: float) -> float:
        """Return max |(1 + G_σ)² − (1 + G_b)| / (1 + G_b) over the batch."""
        gb = self.g_b(x, h)
        gs = self.g_sigma(x, h)
        return float(np.max(np.abs((1.0 + gs) ** 2 - (1.0 + gb)) / (1.0 + gb)))

    @classmethod
    def identity(cls, model: SdeModel) -> "TamedCoefficients":
        """Return G_b = G_σ = 0: the untamed coefficients."""
        return cls(base=model, g_b=_zero, g_sigma=_zero, case_i_exact=True, name="identity")

    @classmethod
    def case_i(cls, model: SdeModel, g_b: GFn, name: str = "case-i") -> "TamedCoefficients":
        """Return squared-balance coefficients from G_b, with G_σ = √(1 + G_b) − 1."""

        def g_sigma(x: np.ndarray, h: float) -> np.ndarray:
            return np.sqrt(1.0 + g_b(x, h)) - 1.0

        return cls(base=model, g_b=g_b, g_sigma=g_sigma, case_i_exact=True, name=name)

    @classmethod
    def single_g(
        cls,
        model: SdeModel,
        g: Callable[[np.ndarray], np.ndarray],
        alpha: float,
        anchored_at_origin: bool = False,
        name: Optional[str] = None,
    ) -> "TamedCoefficients":
        """Return G_b = G_σ = G(x)h^α."""

        def g_h(x: np.ndarray, h: float) -> np.ndarray:
            return g(x) * h**alpha

        return cls(
            base=model,
            g_b=g_h,
            g_sigma=g_h,
            anchored_at_origin=anchored_at_origin,
            name=name or f"single-g α={alpha:g}",
        )
