"""SDE models, Lyapunov functions, and the diffusion operators L and L^h.

`catalog` holds the builtin models (cubic, lorenz, vdp, gbm, zero,
linear-pair) and Lyapunov families (norm-power, weighted-poly, vdp-V).

"""

from .model import GrowthProfile, SdeModel, as_batch, zero_model
from .lyapunov import (
    LyapunovSpec,
    LyapunovSubclass,
    derivative_ratios,
    estimate_c,
    lyapunov_sum,
    norm_power,
    vdp_v,
    weighted_poly,
)
from .operator import FiniteDifferenceReport, diffusion_operator, finite_difference_check, tamed_diffusion_operator
from .sampling import SampleSpec, uniform_in_ball
from .catalog import CATALOG, BuiltinCatalog, ComparisonPair, linear_pair, lorenz_rho, vdp_rho

__all__ = [
    # model
    "GrowthProfile",
    "SdeModel",
    "as_batch",
    "zero_model",
    # lyapunov
    "LyapunovSpec",
    "LyapunovSubclass",
    "derivative_ratios",
    "estimate_c",
    "lyapunov_sum",
    "norm_power",
    "vdp_v",
    "weighted_poly",
    # operator
    "FiniteDifferenceReport",
    "diffusion_operator",
    "finite_difference_check",
    "tamed_diffusion_operator",
    # sampling
    "SampleSpec",
    "uniform_in_ball",
    # catalog
    "CATALOG",
    "BuiltinCatalog",
    "ComparisonPair",
    "linear_pair",
    "lorenz_rho",
    "vdp_rho",
]
