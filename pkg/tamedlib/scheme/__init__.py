"""One-step maps: standard, balanced, projected, composed and truncated-noise Euler."""

from .coefficients import GFn, TamedCoefficients
from .projection import ProjectionConfig, ProjectionVariant
from .noise import NoiseTruncation, truncate_noise, truncation_level
from .step import step_balanced, step_composed, step_projected, step_standard, step_truncated_noise
from .config import SchemeConfig, SchemeKind, Stepper, System

__all__ = [
    # coefficients
    "GFn",
    "TamedCoefficients",
    # projection
    "ProjectionConfig",
    "ProjectionVariant",
    # noise
    "NoiseTruncation",
    "truncate_noise",
    "truncation_level",
    # step
    "step_balanced",
    "step_composed",
    "step_projected",
    "step_standard",
    "step_truncated_noise",
    # config
    "SchemeConfig",
    "SchemeKind",
    "Stepper",
    "System",
]
