"""Exceptions raised by tamedlib.

Every exception derives from `TamedlibError`. The user-facing ones also
derive from `ValueError`, so callers that only know about bad values can
still catch them.

Divergence of a simulated path is not an error: ensembles record it per
path.
"""

from typing import Any, Optional


class TamedlibError(Exception):
    """Root of all tamedlib exceptions."""


class DomainViolationError(TamedlibError, ValueError):
    """An evaluator returned a non-finite value at a finite input.

    Attributes:
        x: the offending point(s), as passed to the evaluator
    """

    def __init__(self, message: str, x: Any = None) -> None:
        super().__init__(message)
        self.x = x


class ConfigurationError(TamedlibError, ValueError):
    """Invalid scheme, taming, projection, truncation, lattice or experiment settings.

    The message names the violated condition, e.g. ``"h ∈ (0,1] violated"``.
    """


class ThresholdError(ConfigurationError):
    """A step size exceeds a derived ceiling.

    Attributes:
        h: the requested step size
        h_max: the ceiling it was tested against
    """

    def __init__(self, message: str, h: float, h_max: Optional[float] = None) -> None:
        super().__init__(message)
        self.h = h
        self.h_max = h_max


class EstimationError(TamedlibError, ValueError):
    """Too few usable points for a fit."""
