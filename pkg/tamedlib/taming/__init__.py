"""Taming plans, projection exponents, step-size ceilings and sampled hypothesis checks."""

from .plan import (
    TamingPlan,
    TamingPurpose,
    build_balanced_taming,
    build_projected_stability_taming,
    build_stability_taming,
    lipschitz_taming,
    plan_balanced_taming,
    plan_projected_stability_taming,
    plan_stability_taming,
    positivity_taming,
    validate_taming_exponents,
)
from .thresholds import (
    DEFAULT_SLACK,
    HPurpose,
    HThreshold,
    ProjectionExponent,
    ProjectionPurpose,
    RhoTildeMode,
    choose_step,
    compute_mu_threshold,
    compute_rho_tilde,
    derive_h_threshold,
    derive_projection_exponent,
    positivity_lhs,
    positivity_threshold,
)
from .conditions import (
    DriftForm,
    TamingCondition,
    ViolationReport,
    check_drift_order,
    check_linear_bound,
    check_lipschitz_certificate,
    check_lyapunov_drift,
    check_one_sided_lipschitz,
    check_origin_conditions,
    check_taming_conditions,
    check_z_growth,
    default_z,
    square_decrease_margin,
)

__all__ = [
    # plan
    "TamingPlan",
    "TamingPurpose",
    "build_balanced_taming",
    "build_projected_stability_taming",
    "build_stability_taming",
    "lipschitz_taming",
    "plan_balanced_taming",
    "plan_projected_stability_taming",
    "plan_stability_taming",
    "positivity_taming",
    "validate_taming_exponents",
    # thresholds
    "DEFAULT_SLACK",
    "HPurpose",
    "HThreshold",
    "ProjectionExponent",
    "ProjectionPurpose",
    "RhoTildeMode",
    "choose_step",
    "compute_mu_threshold",
    "compute_rho_tilde",
    "derive_h_threshold",
    "derive_projection_exponent",
    "positivity_lhs",
    "positivity_threshold",
    # conditions
    "DriftForm",
    "TamingCondition",
    "ViolationReport",
    "check_drift_order",
    "check_linear_bound",
    "check_lipschitz_certificate",
    "check_lyapunov_drift",
    "check_one_sided_lipschitz",
    "check_origin_conditions",
    "check_taming_conditions",
    "check_z_growth",
    "default_z",
    "square_decrease_margin",
]
