"""Pytest tests for tamedlib.core.operator."""

from hypothesis import given, settings
from hypothesis import strategies as st
import numpy as np
import pytest

from tamedlib.core import catalog
from tamedlib.core.lyapunov import lyapunov_sum, norm_power, vdp_v
from tamedlib.core.model import GrowthProfile, SdeModel
from tamedlib.core.operator import diffusion_operator, tamed_diffusion_operator
from tamedlib.core.sampling import SampleSpec
from tamedlib.errors import DomainViolationError
from tamedlib.scheme.coefficients import TamedCoefficients

coordinate = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)


class TestClosedForms(object):
    """LV against hand-derived expressions."""

    def test_cubic(self) -> None:
        # LV = −2x⁴ + x⁴
        cubic = catalog.cubic()
        v = norm_power(2)
        assert diffusion_operator(cubic, v, 0.0, np.array([1.0])) == pytest.approx(-1.0)
        values = diffusion_operator(cubic, v, 0.0, np.array([[1.0], [2.0]]))
        assert values == pytest.approx([-1.0, -16.0])

    def test_lorenz(self) -> None:
        x = SampleSpec(n=500).points(3)
        values = diffusion_operator(catalog.lorenz(), norm_power(2, dim=3), 0.0, x)
        rho = catalog.lorenz_rho()
        assert rho == 1.75
        np.testing.assert_allclose(values, -rho * np.sum(x * x, axis=1), rtol=1e-10, atol=1e-12)

    def test_vdp(self) -> None:
        x = SampleSpec(n=500).points(2)
        values = diffusion_operator(catalog.vdp(), vdp_v(), 0.0, x)
        expected = -4.0 * x[:, 0] ** 4 - 2.0 * x[:, 1] ** 2
        np.testing.assert_allclose(values, expected, rtol=1e-10, atol=1e-12)
        # LV ≤ −ρV with ρ = 1
        assert np.all(values <= -catalog.vdp_rho() * vdp_v().value(x) + 1e-12)

    def test_zero_model(self) -> None:
        x = np.ones((3, 2))
        values = diffusion_operator(catalog.CATALOG.model("zero", dim_state=2), norm_power(2, dim=2), 0.0, x)
        assert values.tolist() == [0.0, 0.0, 0.0]


class TestTamed(object):
    """L^h with tamed coefficients."""

    cubic = catalog.cubic()
    v = norm_power(2)

    def test_identity_matches_untamed(self) -> None:
        x = SampleSpec(n=200).points(1)
        identity = TamedCoefficients.identity(self.cubic)
        np.testing.assert_array_equal(
            tamed_diffusion_operator(identity, self.v, 0.0, x, 0.1), diffusion_operator(self.cubic, self.v, 0.0, x)
        )

    def test_single_g(self) -> None:
        # G = 2x², h = 1: b^h = −x³/(1 + 2x²), σ^h = x²/(1 + 2x²)
        tamed = TamedCoefficients.single_g(self.cubic, lambda x: 2.0 * x[:, 0] ** 2, alpha=1.0)
        x = 1.0
        expected = (-2.0 * x**4 + x**4 / (1 + 2 * x * x)) / (1 + 2 * x * x)
        assert tamed_diffusion_operator(tamed, self.v, 0.0, np.array([x]), 1.0) == pytest.approx(expected)


class TestErrors(object):
    """Non-finite evaluations."""

    def test_domain_violation(self) -> None:
        model = SdeModel(
            "blowup",
            1,
            1,
            lambda t, x: np.where(x > 1.0, np.inf, -x),
            lambda t, x: x[:, :, None],
            GrowthProfile(K=1.0),
        )
        with pytest.raises(DomainViolationError) as info:
            diffusion_operator(model, norm_power(2), 0.0, np.array([[0.5], [3.0]]))
        assert info.value.x.tolist() == [[3.0]]


class TestLinearity(object):
    """L is linear in V."""

    model = catalog.vdp()
    first = norm_power(2, dim=2)
    second = vdp_v()
    total = lyapunov_sum(first, second)

    @settings(max_examples=50, deadline=None)
    @given(coordinate, coordinate)
    def test_sum(self, x1: float, x2: float) -> None:
        x = np.array([x1, x2])
        lhs = diffusion_operator(self.model, self.total, 0.0, x)
        rhs = diffusion_operator(self.model, self.first, 0.0, x) + diffusion_operator(self.model, self.second, 0.0, x)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)
