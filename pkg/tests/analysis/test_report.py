"""Pytest tests for tamedlib.analysis.report."""

import json

import numpy as np

from tamedlib.analysis.report import ExperimentReport, FitResult, TraceRow, trace_rows

from tests.analysis.synthetic import make_ensemble


class TestExperimentReport(object):
    """Serialization of verdicts."""

    fit = FitResult(-1.0, 0.5, 0.99, 0.01, (1.0, 5.0), 81, 0.002)
    report = ExperimentReport(
        kind="exp_stability",
        passed=True,
        bound=float("inf"),
        bound_description="slope ≤ −0.4ρ",
        measured={"slope": np.float64(-1.0), "final": np.array([1.0, np.nan]), "count": np.int64(3)},
        fit=fit,
        inputs={"h": 0.25, "levels": (0.5, 0.25)},
        runtime=1.5,
    )

    def test_repr(self) -> None:
        assert repr(self.report) == "<ExperimentReport: exp_stability pass>"

    def test_to_dict(self) -> None:
        out = self.report.to_dict()
        # non-finite numbers become null
        assert out["bound"] is None
        assert out["measured"] == {"slope": -1.0, "final": [1.0, None], "count": 3}
        assert out["inputs"]["levels"] == [0.5, 0.25]
        assert out["fit"]["window"] == [1.0, 5.0]
        assert "runtime" not in out
        assert self.report.to_dict(include_runtime=True)["runtime"] == 1.5
        json.dumps(out, allow_nan=False)

    def test_without_fit(self) -> None:
        report = ExperimentReport("moments", False, 2.0, "E|X|² ≤ 2", {})
        assert report.to_dict()["fit"] is None
        assert repr(report) == "<ExperimentReport: moments FAIL>"


class TestTraceRows(object):
    """Rows for the trace CSV."""

    ensemble = make_ensemble(np.array([0.0, 0.5]), {"mean_V": np.array([1.0, 2.0]), "mean_x": np.array([3.0, 4.0])})

    def test_step_major(self) -> None:
        rows = trace_rows(self.ensemble)
        assert rows[0] == TraceRow(0, 0.0, "mean_V", 1.0, 0.0)
        assert [(r.step, r.statistic) for r in rows] == [(0, "mean_V"), (0, "mean_x"), (1, "mean_V"), (1, "mean_x")]

    def test_selected(self) -> None:
        assert [r.value for r in trace_rows(self.ensemble, ["mean_x"])] == [3.0, 4.0]
