"""One-step maps of the explicit Euler family.

Every stepper accepts a single point (`x` of shape `(d,)`, `dW` of shape
`(m,)`) or a batch (`(n, d)` and `(n, m)`) and returns the same shape.
Non-finite results are returned as they are; ensembles flag them.

Examples:
    >>> import numpy as np
    >>> from tamedlib.core import catalog
    >>> float(step_standard(catalog.cubic(), 0.0, np.array([2.0]), np.array([0.05]), 0.1)[0])
    1.4

"""

import logging
from typing import Tuple, Union

import numpy as np

from tamedlib.core.model import SdeModel, as_batch
from tamedlib.scheme.coefficients import TamedCoefficients
from tamedlib.scheme.noise import truncate_noise
from tamedlib.scheme.projection import ProjectionConfig

logger = logging.getLogger(__name__)


def _batches(x: np.ndarray, dW: np.ndarray, d: int, m: int) -> Tuple[np.ndarray, np.ndarray, bool]:
    xb, single = as_batch(x, d)
    w = np.asarray(dW, dtype=float).reshape(xb.shape[0], m)
    return xb, w, single


def _euler(b: np.ndarray, sigma: np.ndarray, x: np.ndarray, dW: np.ndarray, h: float) -> np.ndarray:
    return x + b * h + np.einsum("nij,nj->ni", sigma, dW)


def _unbatch(out: np.ndarray, single: bool) -> np.ndarray:
    return out[0] if single else out


def step_standard(model: SdeModel, t: float, x: np.ndarray, dW: np.ndarray, h: float) -> np.ndarray:
    """Return x + b(t, x)h + σ(t, x)dW."""
    xb, w, single = _batches(x, dW, model.dim_state, model.dim_noise)
    out = _euler(model.drift(t, xb), model.diffusion(t, xb), xb, w, h)
    return _unbatch(out, single)


def step_balanced(tamed: TamedCoefficients, t: float, x: np.ndarray, dW: np.ndarray, h: float) -> np.ndarray:
    """Return x + b^h(t, x)h + σ^h(t, x)dW."""
    model = tamed.base
    xb, w, single = _batches(x, dW, model.dim_state, model.dim_noise)
    out = _euler(tamed.drift(t, xb, h), tamed.diffusion(t, xb, h), xb, w, h)
    return _unbatch(out, single)


def step_projected(
    model: SdeModel, projection: ProjectionConfig, t: float, x: np.ndarray, dW: np.ndarray, h: float
) -> np.ndarray:
    """Return Π(x + b(t, x)h + σ(t, x)dW)."""
    xb, w, single = _batches(x, dW, model.dim_state, model.dim_noise)
    out = projection.project(_euler(model.drift(t, xb), model.diffusion(t, xb), xb, w, h), h)
    return _unbatch(out, single)


def step_composed(
    tamed: TamedCoefficients, projection: ProjectionConfig, t: float, x: np.ndarray, dW: np.ndarray, h: float
) -> np.ndarray:
    """Return Π applied to the balanced step."""
    model = tamed.base
    xb, w, single = _batches(x, dW, model.dim_state, model.dim_noise)
    out = projection.project(_euler(tamed.drift(t, xb, h), tamed.diffusion(t, xb, h), xb, w, h), h)
    return _unbatch(out, single)


def step_truncated_noise(
    tamed_or_model: Union[TamedCoefficients, SdeModel], t: float, x: np.ndarray, xi: np.ndarray, h: float
) -> np.ndarray:
    """Return x + b^h h + σ^h √h ζ_h, with ζ_h the truncated standard normal draw `xi`.

    A plain model is stepped with its untamed coefficients.
    """
    dW = np.sqrt(h) * truncate_noise(xi, h)
    if isinstance(tamed_or_model, TamedCoefficients):
        return step_balanced(tamed_or_model, t, x, dW, h)
    return step_standard(tamed_or_model, t, x, dW, h)
