"""Scheme configuration: which one-step map, at which step size, over which horizon."""

from dataclasses import dataclass
from enum import Enum
import logging
import math
from typing import Callable, Optional, Union

import numpy as np

from tamedlib.core.model import SdeModel
from tamedlib.errors import ConfigurationError
from tamedlib.scheme.coefficients import TamedCoefficients
from tamedlib.scheme.noise import truncation_level
from tamedlib.scheme.projection import ProjectionConfig
from tamedlib.scheme.step import step_balanced, step_composed, step_projected, step_standard, step_truncated_noise

logger = logging.getLogger(__name__)

System = Union[SdeModel, TamedCoefficients]
# (t, x[n, d], dW[n, m]) -> x[n, d]
Stepper = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


class SchemeKind(str, Enum):
    """The scheme variants."""

    standard = "standard"
    balanced = "balanced"
    projected = "projected"
    composed = "composed"
    truncated_noise = "truncated_noise"
    truncated_noise_balanced = "truncated_noise_balanced"

    @property
    def tamed(self) -> bool:
        return self in (SchemeKind.balanced, SchemeKind.composed, SchemeKind.truncated_noise_balanced)

    @property
    def uses_projection(self) -> bool:
        return self in (SchemeKind.projected, SchemeKind.composed)

    @property
    def truncated(self) -> bool:
        return self in (SchemeKind.truncated_noise, SchemeKind.truncated_noise_balanced)


@dataclass(frozen=True)
class SchemeConfig:
    """A scheme kind with its step size, horizon and kind-specific parts.

    Attributes:
        kind: which one-step map
        h: step size in (0, 1]
        T: horizon
        taming: tamed coefficients, for the tamed kinds
        projection: projection settings, for the projected kinds

    Raises:
        ConfigurationError: a guard fails; the message names it
    """

    kind: SchemeKind
    h: float
    T: float
    taming: Optional[TamedCoefficients] = None
    projection: Optional[ProjectionConfig] = None

    def __post_init__(self) -> None:
        if not 0 < self.h <= 1:
            raise ConfigurationError(f"h ∈ (0,1] violated: h={self.h}")
        if not self.T > 0:
            raise ConfigurationError(f"T > 0 violated: T={self.T}")
        if self.n_steps < 1:
            raise ConfigurationError(f"⌊T/h⌋ ≥ 1 violated: T={self.T}, h={self.h}")
        if self.kind.uses_projection and self.projection is None:
            raise ConfigurationError(f"scheme {self.kind.value} requires a projection")
        if self.kind.truncated:
            truncation_level(self.h)

    @property
    def n_steps(self) -> int:
        """Return ⌊T/h⌋, tolerating rounding in T/h."""
        return int(math.floor(self.T / self.h + 1e-9))

    def times(self) -> np.ndarray:
        """Return the grid t_k = kh, k = 0..n_steps."""
        return np.arange(self.n_steps + 1) * self.h

    def divergence_cap(self) -> float:
        """Return the norm above which a path counts as diverged."""
        return math.inf if self.kind.uses_projection else 1e12

    def coefficients(self, system: System) -> TamedCoefficients:
        """Return the tamed coefficients this scheme steps with."""
        if self.taming is not None:
            return self.taming
        if isinstance(system, TamedCoefficients):
            return system
        if self.kind.tamed:
            raise ConfigurationError(f"scheme {self.kind.value} requires tamed coefficients")
        return TamedCoefficients.identity(system)

    def model(self, system: System) -> SdeModel:
        return system.base if isinstance(system, TamedCoefficients) else system

    def prepare_initial(self, x0: np.ndarray) -> np.ndarray:
        """Return the initial states, pre-projected for the projected kinds."""
        if self.projection is not None and self.kind.uses_projection:
            return self.projection.project(x0, self.h)
        return x0

    def stepper(self, system: System) -> Stepper:
        """Return the batched one-step map (t, x, dW) -> x_next for `system`."""
        h = self.h
        kind = self.kind
        model = self.model(system)
        untamed = not (kind.tamed or self.taming is not None or isinstance(system, TamedCoefficients))
        tamed = None if untamed else self.coefficients(system)
        projection = self.projection
        sqrt_h = math.sqrt(h)

        def step(t: float, x: np.ndarray, dW: np.ndarray) -> np.ndarray:
            if kind.truncated:
                return step_truncated_noise(model if tamed is None else tamed, t, x, dW / sqrt_h, h)
            if kind.uses_projection:
                assert projection is not None
                if tamed is None:
                    return step_projected(model, projection, t, x, dW, h)
                return step_composed(tamed, projection, t, x, dW, h)
            if tamed is None:
                return step_standard(model, t, x, dW, h)
            return step_balanced(tamed, t, x, dW, h)

        return step
