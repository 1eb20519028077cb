"""Pytest tests for tamedlib.analysis.properties."""

import numpy as np
import pytest

from tamedlib.analysis.properties import check_nonnegativity, comparison_hypotheses, run_comparison
from tamedlib.core import catalog
from tamedlib.core.catalog import ComparisonPair
from tamedlib.core.sampling import SampleSpec
from tamedlib.montecarlo.rng import RngSpec
from tamedlib.taming.plan import lipschitz_taming
from tamedlib.taming.thresholds import positivity_threshold

from tests.analysis.synthetic import make_ensemble

SAMPLES = SampleSpec(n=2000)


class TestNonnegativity(object):
    """Counting negative iterates."""

    t = np.array([0.0, 0.25, 0.5, 0.75])

    def test_clean(self) -> None:
        report = check_nonnegativity(make_ensemble(self.t, {"negative_count": np.zeros(4)}))
        assert report.passed
        assert report.measured["first_violation_step"] is None
        assert report.measured["path_steps"] == 30

    def test_counted(self) -> None:
        ensemble = make_ensemble(self.t, {"negative_count": np.array([0.0, 0.0, 2.0, 1.0])})
        report = check_nonnegativity(ensemble)
        assert not report.passed
        assert report.measured["negative_step_count"] == 3
        assert report.measured["first_violation_step"] == 2
        assert report.measured["first_violation_time"] == 0.5
        assert [row.value for row in report.rows] == [0.0, 0.0, 2.0, 1.0]

    def test_threshold_note(self) -> None:
        # h_max ≈ 0.19 at μ = 1, α = 0
        ensemble = make_ensemble(self.t, {"negative_count": np.zeros(4)})
        report = check_nonnegativity(ensemble, positivity_threshold(1.0, 0.0))
        assert report.passed
        assert report.notes[0].startswith("h=0.25 exceeds the positivity threshold")


class TestComparison(object):
    """Hypotheses and coupled runs for an ordered pair."""

    pair = catalog.linear_pair(0.1, 0.2, 0.3)
    h = 2.0**-8

    def test_hypotheses(self) -> None:
        lower = lipschitz_taming(self.pair.lower, 1.0, 0.5)
        upper = lipschitz_taming(self.pair.upper, 1.0, 0.5)
        hypotheses = comparison_hypotheses(lower, upper, (1.0, 1.0), self.h, 0.5, sample_spec=SAMPLES)
        assert hypotheses.drift_order
        assert hypotheses.origin
        # σh^{α/2} dominates λh^α
        assert hypotheses.certificate_mu == pytest.approx(0.3 * self.h**0.25, rel=1e-6)
        assert hypotheses.threshold.h_max == 1.0
        assert hypotheses.failures(self.h) == []

    def test_run(self) -> None:
        report = run_comparison(self.pair, (1.0, 1.0), self.h, 0.25, 50, RngSpec(2), sample_spec=SAMPLES)
        assert report.passed
        assert report.measured["violation_count"] == 0
        assert report.measured["negative_count"] == 0
        assert report.measured["max_gap"] <= 0.0
        assert not report.measured["paths_identical"]
        assert len(report.rows) == 2 * 65

    def test_initial_order(self) -> None:
        report = run_comparison(self.pair, (2.0, 1.0), self.h, 0.25, 10, RngSpec(2), sample_spec=SAMPLES)
        assert not report.passed
        assert report.measured["violation_count"] > 0
        assert "hypothesis unmet: initial order X0 ≤ Y0" in report.notes

    def test_swapped_drifts(self) -> None:
        swapped = ComparisonPair(lower=self.pair.upper, upper=self.pair.lower)
        report = run_comparison(swapped, (1.0, 1.0), self.h, 0.25, 10, RngSpec(2), sample_spec=SAMPLES)
        assert not report.passed
        assert "hypothesis unmet: drift order ν^h ≤ λ^h" in report.notes

    def test_certificate_below_sampled(self) -> None:
        lower = lipschitz_taming(self.pair.lower, 1.0, 0.5)
        upper = lipschitz_taming(self.pair.upper, 1.0, 0.5)
        hypotheses = comparison_hypotheses(lower, upper, (0.5, 1.0), self.h, 0.5, mu=1e-6, sample_spec=SAMPLES)
        assert not hypotheses.certificate
        assert hypotheses.certificate_mu == pytest.approx(0.3 * self.h**0.25, rel=1e-6)
        assert hypotheses.failures(self.h) == [f"Lipschitz certificate μ ≥ {hypotheses.certificate_mu:.6g}"]
        assert comparison_hypotheses(lower, upper, (0.5, 1.0), self.h, 0.5, mu=1.0, sample_spec=SAMPLES).certificate

    def test_run_with_too_small_mu(self) -> None:
        report = run_comparison(self.pair, (0.5, 1.0), self.h, 0.25, 20, RngSpec(1), mu=1e-6, sample_spec=SAMPLES)
        assert report.passed is False
        assert any(note.startswith("hypothesis unmet: Lipschitz certificate μ ≥") for note in report.notes)
