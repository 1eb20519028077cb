"""The diffusion operators L and L^h.

    LV(x) = ⟨∇V(x), b(t, x)⟩ + ½ tr[σ(t, x)ᵀ V⁽²⁾(x) σ(t, x)]

L^h is the same expression with the tamed coefficients (b^h, σ^h).

Examples:
    >>> import numpy as np
    >>> from tamedlib.core import catalog, lyapunov
    >>> float(diffusion_operator(catalog.cubic(), lyapunov.norm_power(2), 0.0, np.array([1.0])))
    -1.0

"""

from dataclasses import dataclass
import logging
from typing import TYPE_CHECKING, List, Union

import numpy as np

from tamedlib.core.lyapunov import LyapunovSpec
from tamedlib.core.model import SdeModel, as_batch, ensure_finite
from tamedlib.errors import DomainViolationError

if TYPE_CHECKING:
    from tamedlib.scheme.coefficients import TamedCoefficients

logger = logging.getLogger(__name__)


def generator_value(lyap: LyapunovSpec, x: np.ndarray, b: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Return ⟨∇V, b⟩ + ½ tr[σᵀ V⁽²⁾ σ] row by row for batched x, b and σ."""
    grad = lyap.gradient(x)
    hess = lyap.hessian(x)
    drift_term = np.einsum("ni,ni->n", grad, b)
    diffusion_term = 0.5 * np.einsum("nij,nik,njk->n", hess, sigma, sigma)
    return drift_term + diffusion_term


def _checked(values: np.ndarray, batch: np.ndarray, single: bool) -> Union[float, np.ndarray]:
    bad = ~np.isfinite(values)
    if bad.any():
        raise DomainViolationError(f"operator is not finite at {batch[bad][:3].tolist()}", x=batch[bad])
    return float(values[0]) if single else values


def diffusion_operator(model: SdeModel, lyap: LyapunovSpec, t: float, x: np.ndarray) -> Union[float, np.ndarray]:
    """Return LV(x) for a point (as a float) or a batch (as an `(n,)` array).

    Raises:
        DomainViolationError: an evaluation is not finite; `.x` holds the points
    """
    batch, single = as_batch(x, model.dim_state)
    b = ensure_finite(np.asarray(model.drift(t, batch), dtype=float), batch, "drift")
    sigma = ensure_finite(np.asarray(model.diffusion(t, batch), dtype=float), batch, "diffusion")
    return _checked(generator_value(lyap, batch, b, sigma), batch, single)


def tamed_diffusion_operator(
    tamed: "TamedCoefficients", lyap: LyapunovSpec, t: float, x: np.ndarray, h: float
) -> Union[float, np.ndarray]:
    """Return L^hV(x): the diffusion operator of the tamed coefficients at step size h."""
    batch, single = as_batch(x, tamed.base.dim_state)
    b = ensure_finite(tamed.drift(t, batch, h), batch, "tamed drift")
    sigma = ensure_finite(tamed.diffusion(t, batch, h), batch, "tamed diffusion")
    return _checked(generator_value(lyap, batch, b, sigma), batch, single)


@dataclass(frozen=True)
class FiniteDifferenceReport:
    """Deviation of analytic derivatives from central differences.

    Deviations are |fd − exact| / (1 + |exact|), maximised over entries.

    Attributes:
        points: the points checked, `(n, d)`
        gradient_deviation: per point
        hessian_deviation: per point
        tolerance: the flag threshold
    """

    points: np.ndarray
    gradient_deviation: np.ndarray
    hessian_deviation: np.ndarray
    tolerance: float

    @property
    def flagged(self) -> List[int]:
        """Return the indices of points whose deviation exceeds the tolerance."""
        worst = np.maximum(self.gradient_deviation, self.hessian_deviation)
        return [int(i) for i in np.flatnonzero(worst > self.tolerance)]

    @property
    def passed(self) -> bool:
        return not self.flagged


def finite_difference_check(
    lyap: LyapunovSpec, sample_points: np.ndarray, tolerance: float = 1e-5
) -> FiniteDifferenceReport:
    """Compare gradient and hessian of `lyap` with central differences of its value."""
    points = np.atleast_2d(np.asarray(sample_points, dtype=float))
    n, d = points.shape
    eps = np.finfo(float).eps
    grad_dev = np.zeros(n)
    hess_dev = np.zeros(n)
    eye = np.eye(d)
    for k in range(n):
        x = points[k]
        scale = 1.0 + np.linalg.norm(x)
        hg = eps ** (1.0 / 3.0) * scale
        hh = eps**0.25 * scale

        def v(y: np.ndarray) -> float:
            return float(lyap.value(y.reshape(1, d))[0])

        fd_grad = np.array([(v(x + hg * eye[i]) - v(x - hg * eye[i])) / (2 * hg) for i in range(d)])
        fd_hess = np.empty((d, d))
        for i in range(d):
            for j in range(d):
                ei, ej = hh * eye[i], hh * eye[j]
                fd_hess[i, j] = (v(x + ei + ej) - v(x + ei - ej) - v(x - ei + ej) + v(x - ei - ej)) / (4 * hh * hh)
        exact_grad = lyap.gradient(x.reshape(1, d))[0]
        exact_hess = lyap.hessian(x.reshape(1, d))[0]
        grad_dev[k] = np.max(np.abs(fd_grad - exact_grad) / (1.0 + np.abs(exact_grad)))
        hess_dev[k] = np.max(np.abs(fd_hess - exact_hess) / (1.0 + np.abs(exact_hess)))
    report = FiniteDifferenceReport(points, grad_dev, hess_dev, tolerance)
    if report.flagged:
        logger.warning("finite-difference check of %s flagged %d point(s)", lyap.name, len(report.flagged))
    return report
