"""Estimators and pathwise checks that turn ensembles into reports."""

from .report import ExperimentReport, FitResult, TraceRow, trace_rows
from .estimators import (
    MomentClaim,
    check_exponential_stability,
    check_strong_rate,
    detect_as_stability,
    estimate_moments,
    estimate_strong_rate,
    estimate_v_integrability,
    fit_exponential_rate,
    integrability_bound,
)
from .properties import ComparisonHypotheses, check_nonnegativity, comparison_hypotheses, run_comparison

__all__ = [
    # report
    "ExperimentReport",
    "FitResult",
    "TraceRow",
    "trace_rows",
    # estimators
    "MomentClaim",
    "check_exponential_stability",
    "check_strong_rate",
    "detect_as_stability",
    "estimate_moments",
    "estimate_strong_rate",
    "estimate_v_integrability",
    "fit_exponential_rate",
    "integrability_bound",
    # properties
    "ComparisonHypotheses",
    "check_nonnegativity",
    "comparison_hypotheses",
    "run_comparison",
]
