"""Pytest tests for tamedlib.core.lyapunov."""

from dataclasses import replace
from math import sqrt

import numpy as np
import pytest

from tamedlib.core.lyapunov import (
    LyapunovSubclass,
    derivative_ratios,
    estimate_c,
    lyapunov_sum,
    norm_power,
    vdp_v,
    weighted_poly,
)
from tamedlib.core.operator import finite_difference_check
from tamedlib.core.sampling import SampleSpec
from tamedlib.errors import ConfigurationError


class TestNormPower(object):
    """V(x) = |x|^p."""

    quadratic = norm_power(2)
    quartic = norm_power(4, dim=3)

    def test_values(self) -> None:
        x = np.array([[3.0, 4.0]])
        v = norm_power(2, dim=2)
        assert v.value(x).tolist() == [25.0]
        assert v.gradient(x).tolist() == [[6.0, 8.0]]
        assert v.hessian(x)[0].tolist() == [[2.0, 0.0], [0.0, 2.0]]

    def test_exponents(self) -> None:
        assert self.quadratic.gamma == 0.5
        assert self.quartic.gamma == 0.25
        assert self.quartic.subclass is LyapunovSubclass.bar
        assert self.quartic.monotone_radial

    def test_closed_form_c(self) -> None:
        assert self.quadratic.c == 2.0
        assert self.quartic.c == pytest.approx(8.0 * sqrt(45.0))

    def test_repr(self) -> None:
        assert repr(self.quadratic) == "<LyapunovSpec: norm-power-2 p=2 γ=0.5 c=2>"

    def test_guards(self) -> None:
        with pytest.raises(ConfigurationError, match="p ≥ 2"):
            norm_power(1)
        with pytest.raises(ConfigurationError, match="γ ∈ \\(0, 1/p\\]"):
            replace(self.quadratic, gamma=0.6)
        with pytest.raises(ConfigurationError, match="c > 0"):
            replace(self.quadratic, c=0.0)

    def test_hessian_at_origin(self) -> None:
        assert np.all(np.isfinite(self.quartic.hessian(np.zeros((1, 3)))))

    def test_derivative_ratios(self) -> None:
        samples = SampleSpec(n=2000).points(1)
        ratios = derivative_ratios(self.quadratic, samples)
        assert ratios[1] is not None and ratios[1] <= 1.0
        # ‖V''‖ = 2 = c everywhere
        assert ratios[2] == pytest.approx(1.0)

    def test_quartic_bounds_hold(self) -> None:
        ratios = derivative_ratios(self.quartic, SampleSpec(n=2000).points(3))
        assert set(ratios) == {1, 2, 3, 4}
        assert all(r is not None and r <= 1.0 + 1e-12 for r in ratios.values())

    def test_unavailable_orders(self) -> None:
        cubic_power = norm_power(3)
        ratios = derivative_ratios(cubic_power, SampleSpec(n=500).points(1))
        assert ratios[3] is None
        assert cubic_power.c == pytest.approx(estimate_c(cubic_power))


class TestWeightedPoly(object):
    """V(x) = Σ cᵢ xᵢ^{pᵢ}."""

    v = vdp_v()

    def test_values(self) -> None:
        x = np.array([[1.0, 1.0]])
        assert self.v.name == "vdp-V"
        assert self.v.value(x).tolist() == [3.0]
        assert self.v.gradient(x).tolist() == [[4.0, 4.0]]
        assert self.v.hessian(x)[0].tolist() == [[12.0, 0.0], [0.0, 4.0]]
        assert self.v.p == 4
        assert self.v.subclass is LyapunovSubclass.hat

    def test_higher_derivatives(self) -> None:
        x = np.array([[2.0, 1.0]])
        # 24 x₁ and 24
        assert self.v.derivative_norm(x, 3).tolist() == [48.0]
        assert self.v.derivative_norm(x, 4).tolist() == [24.0]

    def test_guards(self) -> None:
        with pytest.raises(ConfigurationError, match="even"):
            weighted_poly((1.0,), (3,))
        with pytest.raises(ConfigurationError, match="positive"):
            weighted_poly((1.0, -1.0), (2, 2))
        with pytest.raises(ConfigurationError, match="one power per coefficient"):
            weighted_poly((1.0, 1.0), (2,))

    def test_monotone(self) -> None:
        assert weighted_poly((1.0, 1.0), (2, 2)).monotone_radial
        assert not self.v.monotone_radial


class TestFiniteDifference(object):
    """Analytic derivatives against central differences."""

    points = SampleSpec(n=20, radius=2.0, n_origin=0).points(2)

    def test_builtins_pass(self) -> None:
        for lyap in (norm_power(2, dim=2), norm_power(4, dim=2), vdp_v()):
            report = finite_difference_check(lyap, self.points)
            assert report.passed, lyap.name

    def test_wrong_gradient_is_flagged(self) -> None:
        v = norm_power(2, dim=2)
        broken = replace(v, gradient=lambda x: 3.0 * x)
        report = finite_difference_check(broken, self.points)
        assert not report.passed
        assert len(report.flagged) == len(self.points)


class TestSum(object):
    """V₁ + V₂."""

    def test_sum(self) -> None:
        total = lyapunov_sum(norm_power(2, dim=2), vdp_v())
        x = np.array([[1.0, 2.0]])
        assert total.value(x).tolist() == [5.0 + 9.0]
        assert total.p == 2
        assert total.gamma == 0.25
        assert finite_difference_check(total, x).passed
