"""Pytest tests for tamedlib.taming.thresholds."""

import math

from hypothesis import given, settings
from hypothesis import strategies as st
import pytest

from tamedlib.core import catalog
from tamedlib.core.lyapunov import norm_power
from tamedlib.errors import ConfigurationError
from tamedlib.taming.thresholds import (
    HPurpose,
    HThreshold,
    ProjectionPurpose,
    choose_step,
    compute_mu_threshold,
    compute_rho_tilde,
    derive_h_threshold,
    derive_projection_exponent,
    positivity_lhs,
    positivity_threshold,
)


class TestProjectionExponent(object):
    """Projection exponents for the cubic and Lorenz models."""

    cubic = catalog.cubic().growth
    v = norm_power(2)

    def test_integrability(self) -> None:
        # β₂/((κ−1)qγ) = 0.25/(2·2·0.5), not strict
        exponent = derive_projection_exponent("integrability", self.v, self.cubic, beta2=0.25)
        assert exponent.r == pytest.approx(0.125)
        assert exponent.slack == 1.0
        assert not exponent.unconstrained

    def test_l2_rate(self) -> None:
        exponent = derive_projection_exponent(ProjectionPurpose.l2_rate, self.v, self.cubic)
        assert exponent.bound == pytest.approx(0.25)
        assert exponent.r == pytest.approx(0.225)

    def test_stab2(self) -> None:
        assert derive_projection_exponent("stab2", self.v, self.cubic).bound == pytest.approx(0.125)
        lorenz = catalog.lorenz().growth
        exponent = derive_projection_exponent("stab2", norm_power(2, dim=3), lorenz)
        assert exponent.bound == pytest.approx(0.25)
        refined = derive_projection_exponent("stab2_refined", norm_power(2, dim=3), lorenz)
        # κ₂ = 1 leaves only the drift term
        assert refined.bound == pytest.approx(0.5)

    def test_projected_balanced(self) -> None:
        exponent = derive_projection_exponent("projected_balanced", self.v, self.cubic, alpha=0.25)
        assert exponent.bound == pytest.approx(0.125)

    def test_unconstrained(self) -> None:
        zero = catalog.CATALOG.model("zero").growth
        exponent = derive_projection_exponent("l2_rate", self.v, zero)
        assert exponent.unconstrained
        assert math.isinf(exponent.r)

    def test_unknown_purpose(self) -> None:
        with pytest.raises(ValueError):
            derive_projection_exponent("speed", self.v, self.cubic)


class TestConstants(object):
    """ρ̃ and the μ threshold."""

    def test_rho_tilde_remark(self) -> None:
        assert compute_rho_tilde(2.0, 2, 1, 0.5) == pytest.approx(0.5)
        assert compute_rho_tilde(2.0, 4, 2, 0.5) == pytest.approx(2.0 * 3 * 8 * 0.25)
        with pytest.raises(ConfigurationError, match="μ ≤ 1"):
            compute_rho_tilde(2.0, 2, 1, 1.5)
        with pytest.raises(ConfigurationError, match="μ ≥ 0"):
            compute_rho_tilde(2.0, 2, 1, -0.1)

    def test_rho_tilde_exact_sum(self) -> None:
        assert compute_rho_tilde(2.0, 4, 1, 0.1, mode="exact_sum") == pytest.approx(0.01205)
        # only the quadratic term for p = 2
        assert compute_rho_tilde(2.0, 2, 3, 0.3, mode="exact_sum") == pytest.approx(0.09)

    def test_rho_tilde_general(self) -> None:
        with pytest.raises(ConfigurationError, match="needs γ and m"):
            compute_rho_tilde(2.0, 2, 1, 0.5, mode="general")
        # p = 2, γ = 1/2: ψ̃ = 2·1/1 = 2, so ρ̃ = ½·2·¼ + 2·2·¼·2
        assert compute_rho_tilde(2.0, 2, 1, 0.5, mode="general", gamma=0.5, m=1) == pytest.approx(2.25)

    def test_mu_threshold(self) -> None:
        assert compute_mu_threshold(2.0, 2, 1) == 1.0
        assert compute_mu_threshold(2.0, 2, 1, rho=4.0) == 2.0
        assert compute_mu_threshold(1.0, 4, 1) == pytest.approx(1.0 / math.sqrt(2.5))
        with pytest.raises(ConfigurationError):
            compute_mu_threshold(1.0, 1, 1)

    @settings(max_examples=100, deadline=None)
    @given(
        st.floats(min_value=0.1, max_value=5.0),
        st.integers(min_value=2, max_value=6),
        st.integers(min_value=1, max_value=3),
        st.floats(min_value=0.0, max_value=0.99),
        st.floats(min_value=1e-3, max_value=0.01),
        st.sampled_from(["remark", "exact_sum", "general"]),
    )
    def test_rho_tilde_increasing(self, c: float, p: int, d: int, mu: float, step: float, mode: str) -> None:
        extra = dict(gamma=0.5, m=1) if mode == "general" else {}
        assert compute_rho_tilde(c, p, d, 0.0, mode, **extra) == 0.0
        assert compute_rho_tilde(c, p, d, mu, mode, **extra) < compute_rho_tilde(c, p, d, mu + step, mode, **extra)


class TestPositivity(object):
    """The positivity step-size threshold."""

    def test_peak_below_target(self) -> None:
        # the left side peaks near 1.41 for α = 0
        threshold = positivity_threshold(0.5, 0.0)
        assert threshold.h_max == 1.0
        assert threshold.admits(1.0)
        assert 1.3 < threshold.detail["peak_value"] < 1.5

    def test_first_crossing(self) -> None:
        threshold = positivity_threshold(1.0, 0.0)
        assert 0.19 < threshold.h_max < 0.2
        assert positivity_lhs(threshold.h_max, 0.0) == pytest.approx(1.0, rel=1e-8)
        assert threshold.admits(0.1)
        assert not threshold.admits(0.5)

    @pytest.mark.parametrize("mu, alpha", [(1.0, 0.0), (2.0, 0.5), (4.0, 0.25), (10.0, 0.5)])
    def test_crossing_is_tight(self, mu: float, alpha: float) -> None:
        threshold = positivity_threshold(mu, alpha)
        assert 0 < threshold.h_max < 1
        assert threshold.h_max * 1.01 < threshold.detail["peak_h"]
        assert positivity_lhs(threshold.h_max, alpha) <= (1.0 / mu) * (1 + 1e-8)
        assert positivity_lhs(1.01 * threshold.h_max, alpha) > 1.0 / mu
        assert threshold.admits(0.999 * threshold.h_max)
        assert not threshold.admits(1.01 * threshold.h_max)

    def test_monotone_in_mu(self) -> None:
        assert positivity_threshold(4.0, 0.5).h_max < positivity_threshold(2.0, 0.5).h_max

    def test_guards(self) -> None:
        with pytest.raises(ConfigurationError, match="μ > 0"):
            positivity_threshold(0.0, 0.0)
        with pytest.raises(ConfigurationError, match="α ∈ \\[0,1\\)"):
            positivity_threshold(1.0, 1.0)


class TestStepCeilings(object):
    """derive_h_threshold and choose_step."""

    def test_integrability_balanced(self) -> None:
        assert derive_h_threshold("integrability_balanced", mu=1.0, K=2.0, beta2=0.25).h_max == pytest.approx(0.0625)
        assert derive_h_threshold("integrability_balanced", mu=2.0, K=1.0, beta2=0.25).h_max == 1.0

    def test_as_stability(self) -> None:
        threshold = derive_h_threshold(HPurpose.as_stability, mu=1.0, lam=1.0, K=2.0)
        assert threshold.h_max == pytest.approx(0.0625)
        assert threshold.purpose is HPurpose.as_stability

    def test_projected(self) -> None:
        params = dict(mu=1.0, K=1.0, nu=1.0, kappa_check=2.0, gamma=0.5, q=2.0)
        # β = 1/4 − r(κ̌−1)qγ = 0.05, base = 1/2
        threshold = derive_h_threshold("v_exp_projected", r=0.2, **params)
        assert threshold.h_max == pytest.approx(0.5**20)
        assert threshold.detail["beta"] == pytest.approx(0.05)
        assert derive_h_threshold("v_exp_projected", r=0.3, **params).h_max == 0.0
        as_threshold = derive_h_threshold("projected_as_stability", r=0.2, lam=1.0, **params)
        assert as_threshold.h_max == pytest.approx((1.0 / 3.0) ** 20)

    def test_comparison(self) -> None:
        threshold = derive_h_threshold("comparison", mu=1.0, alpha=0.0)
        assert threshold.purpose is HPurpose.comparison
        assert threshold.h_max == pytest.approx(positivity_threshold(1.0, 0.0).h_max)

    def test_missing_parameter(self) -> None:
        with pytest.raises(ConfigurationError, match="needs parameter 'K'"):
            derive_h_threshold("as_stability", mu=1.0, lam=1.0)

    def test_admits(self) -> None:
        threshold = HThreshold(h_max=0.25, purpose=HPurpose.as_stability)
        assert threshold.admits(0.125)
        assert not threshold.admits(0.25)
        assert not HThreshold(h_max=0.0, purpose=HPurpose.as_stability).admits(0.001)

    def test_choose_step(self) -> None:
        assert choose_step(0.0072) == 2.0**-8
        assert choose_step(1.0) == 0.5
        assert choose_step(2.0) == 1.0
        assert choose_step(2.0, below_one=True) == 0.5
        with pytest.raises(ConfigurationError, match="no admissible step size"):
            choose_step(0.0)
