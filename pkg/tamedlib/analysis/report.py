"""Experiment reports and regression fits.

A report never carries a verdict without the bound it was tested against;
a fit always carries its window and residual diagnostics.
"""

from dataclasses import dataclass, field
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from tamedlib.montecarlo.ensemble import PathEnsemble


@dataclass(frozen=True)
class FitResult:
    """A least-squares line with a t-based confidence half-width.

    Attributes:
        slope: fitted slope
        intercept: fitted intercept
        r_squared: coefficient of determination
        half_width: confidence half-width of the slope
        window: (first, last) abscissa used
        n_points: points used
        residual_std: standard deviation of the residuals
        shortened: the window was cut short at a non-positive value
        excluded: abscissae dropped before fitting
    """

    slope: float
    intercept: float
    r_squared: float
    half_width: float
    window: Tuple[float, float]
    n_points: int
    residual_std: float
    shortened: bool = False
    excluded: Tuple[float, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "half_width": self.half_width,
            "window": list(self.window),
            "n_points": self.n_points,
            "residual_std": self.residual_std,
            "shortened": self.shortened,
            "excluded": list(self.excluded),
        }


@dataclass(frozen=True)
class TraceRow:
    """One line of a trace CSV."""

    step: int
    time: float
    statistic: str
    value: float
    standard_error: float


@dataclass
class ExperimentReport:
    """The verdict of one check together with what it was measured against.

    Attributes:
        kind: which check produced it
        passed: the verdict
        bound: the number the measurement was compared with
        bound_description: how `bound` was obtained
        measured: the measured quantities
        fit: the regression behind the verdict, if any
        rows: per-step statistics for the trace CSV
        notes: hypotheses unmet, windows shortened, points excluded
        inputs: model, scheme, step size, horizon, paths and seed
        runtime: wall-clock seconds; logged, not serialized
    """

    kind: str
    passed: bool
    bound: float
    bound_description: str
    measured: Dict[str, Any]
    fit: Optional[FitResult] = None
    rows: List[TraceRow] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    inputs: Dict[str, Any] = field(default_factory=dict)
    runtime: Optional[float] = None

    def __repr__(self) -> str:
        return f"<ExperimentReport: {self.kind} {'pass' if self.passed else 'FAIL'}>"

    def to_dict(self, include_runtime: bool = False) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "kind": self.kind,
            "passed": self.passed,
            "bound": _finite_or_none(self.bound),
            "bound_description": self.bound_description,
            "measured": {key: _jsonable(value) for key, value in self.measured.items()},
            "fit": self.fit.to_dict() if self.fit is not None else None,
            "notes": list(self.notes),
            "inputs": {key: _jsonable(value) for key, value in self.inputs.items()},
        }
        if include_runtime:
            out["runtime"] = self.runtime
        return out


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


def _jsonable(value: Any) -> Any:
    if isinstance(value, (np.floating, float)):
        return _finite_or_none(float(value))
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


def trace_rows(ensemble: PathEnsemble, names: Optional[List[str]] = None) -> List[TraceRow]:
    """Return the ensemble's traces as rows, step-major, statistics in recorded order."""
    selected = [ensemble.traces[n] for n in (names or list(ensemble.traces))]
    rows = []
    for k, t in enumerate(ensemble.times):
        for trace in selected:
            rows.append(TraceRow(k, float(t), trace.name, float(trace.value[k]), float(trace.standard_error[k])))
    return rows
