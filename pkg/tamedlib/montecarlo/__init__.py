"""Random streams, ensemble simulation and coarse/fine coupling."""

from .rng import RngSpec
from .lattice import BrownianLattice
from .ensemble import (
    DEFAULT_BATCH_SIZE,
    Aggregation,
    Functional,
    FunctionalTrace,
    InitialCondition,
    InitialKind,
    PathEnsemble,
    batch_ranges,
    simulate_ensemble,
)
from .coupling import (
    DEFAULT_H_REF,
    ErrorMetric,
    OneStepDifference,
    Reference,
    StrongErrorResult,
    couple_strong_error,
    estimate_one_step_difference,
    gbm_exact_terminal,
)

__all__ = [
    # rng
    "RngSpec",
    # lattice
    "BrownianLattice",
    # ensemble
    "DEFAULT_BATCH_SIZE",
    "Aggregation",
    "Functional",
    "FunctionalTrace",
    "InitialCondition",
    "InitialKind",
    "PathEnsemble",
    "batch_ranges",
    "simulate_ensemble",
    # coupling
    "DEFAULT_H_REF",
    "ErrorMetric",
    "OneStepDifference",
    "Reference",
    "StrongErrorResult",
    "couple_strong_error",
    "estimate_one_step_difference",
    "gbm_exact_terminal",
]
