"""Pytest tests for tamedlib.scheme: coefficients, one-step maps and SchemeConfig."""

import math

from hypothesis import given, settings
from hypothesis import strategies as st
import numpy as np
import pytest

from tamedlib.core import catalog
from tamedlib.core.model import GrowthProfile, SdeModel
from tamedlib.errors import ConfigurationError
from tamedlib.scheme.coefficients import TamedCoefficients
from tamedlib.scheme.config import SchemeConfig, SchemeKind
from tamedlib.scheme.projection import ProjectionConfig
from tamedlib.scheme.step import (
    step_balanced,
    step_composed,
    step_projected,
    step_standard,
    step_truncated_noise,
)


def _quadratic_g(x: np.ndarray) -> np.ndarray:
    return 2.0 * np.sum(x * x, axis=1)


class TestCoefficients(object):
    """Balanced tamed coefficients."""

    cubic = catalog.cubic()

    def test_identity(self) -> None:
        identity = TamedCoefficients.identity(self.cubic)
        x = np.array([[2.0], [-1.0]])
        np.testing.assert_array_equal(identity.drift(0.0, x, 0.1), self.cubic.drift(0.0, x))
        np.testing.assert_array_equal(identity.diffusion(0.0, x, 0.1), self.cubic.diffusion(0.0, x))
        assert repr(identity) == "<TamedCoefficients: identity on cubic>"

    def test_single_g(self) -> None:
        tamed = TamedCoefficients.single_g(self.cubic, _quadratic_g, alpha=0.5)
        # G = 2·4·0.25^0.5 = 4
        x = np.array([[2.0]])
        assert tamed.drift(0.0, x, 0.25).tolist() == [[-8.0 / 5.0]]
        assert tamed.diffusion(0.0, x, 0.25).tolist() == [[[4.0 / 5.0]]]
        assert tamed.name == "single-g α=0.5"

    @settings(max_examples=100, deadline=None)
    @given(
        st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
        st.sampled_from([1.0, 0.1, 2.0**-8]),
    )
    def test_case_i_identity(self, x: float, h: float) -> None:
        tamed = TamedCoefficients.case_i(self.cubic, lambda y, s: np.abs(y[:, 0]) ** 3 * s)
        assert tamed.case_i_exact
        assert tamed.case_i_deviation(np.array([[x]]), h) <= 1e-12

    def test_anchored(self) -> None:
        # b(x) = 1 − x, so b^h = 1 − x/(1 + G)
        model = SdeModel(
            "shifted",
            1,
            1,
            lambda t, x: 1.0 - x,
            lambda t, x: x[:, :, None],
            GrowthProfile(K=1.0),
        )
        tamed = TamedCoefficients.single_g(model, lambda x: x[:, 0] ** 2, alpha=1.0, anchored_at_origin=True)
        assert tamed.drift(0.0, np.array([[2.0]]), 1.0).tolist() == [[1.0 - 2.0 / 5.0]]


class TestSteps(object):
    """The one-step maps."""

    cubic = catalog.cubic()

    def test_standard(self) -> None:
        assert step_standard(self.cubic, 0.0, np.array([2.0]), np.array([0.05]), 0.1) == pytest.approx([1.4])
        out = step_standard(self.cubic, 0.0, np.array([[2.0], [0.0]]), np.array([[0.05], [1.0]]), 0.1)
        assert out.shape == (2, 1)
        assert out[1, 0] == 0.0

    def test_multidimensional_noise(self) -> None:
        # only σ₂₂ = βx₂ is nonzero, so only dW₂ enters
        vdp = catalog.vdp()
        x = np.array([1.0, 1.0])
        a = step_standard(vdp, 0.0, x, np.array([5.0, 0.1, -3.0]), 0.01)
        b = step_standard(vdp, 0.0, x, np.array([0.0, 0.1, 0.0]), 0.01)
        np.testing.assert_array_equal(a, b)
        assert a == pytest.approx([1.0, 1.0 + 0.01 * (-2.0) + 0.1])

    def test_balanced(self) -> None:
        tamed = TamedCoefficients.single_g(self.cubic, _quadratic_g, alpha=0.5)
        out = step_balanced(tamed, 0.0, np.array([2.0]), np.array([0.5]), 0.25)
        assert out == pytest.approx([2.0 - 8.0 / 5.0 * 0.25 + 4.0 / 5.0 * 0.5])

    def test_projected(self) -> None:
        projection = ProjectionConfig(r=0.25)
        h = 2.0**-4
        out = step_projected(self.cubic, projection, 0.0, np.array([[1.5]]), np.array([[3.0]]), h)
        assert out[0, 0] == pytest.approx(2.0)

    def test_composed(self) -> None:
        tamed = TamedCoefficients.identity(self.cubic)
        projection = ProjectionConfig(r=0.25)
        x, dW, h = np.array([[1.5]]), np.array([[3.0]]), 2.0**-4
        np.testing.assert_array_equal(
            step_composed(tamed, projection, 0.0, x, dW, h), step_projected(self.cubic, projection, 0.0, x, dW, h)
        )

    def test_truncated_noise(self) -> None:
        gbm = catalog.gbm(0.1, 0.5)
        h = math.exp(-2.0)
        # ξ = 10 is clamped to A_h = 2
        out = step_truncated_noise(gbm, 0.0, np.array([1.0]), np.array([10.0]), h)
        assert out == pytest.approx([1.0 + 0.1 * h + 0.5 * math.sqrt(h) * 2.0])
        tamed = TamedCoefficients.identity(gbm)
        np.testing.assert_array_equal(step_truncated_noise(tamed, 0.0, np.array([1.0]), np.array([10.0]), h), out)


class TestSchemeConfig(object):
    """Guards and dispatch of SchemeConfig."""

    cubic = catalog.cubic()

    def test_guards(self) -> None:
        with pytest.raises(ConfigurationError, match="h ∈ \\(0,1\\] violated"):
            SchemeConfig(SchemeKind.standard, 0.0, 1.0)
        with pytest.raises(ConfigurationError, match="h ∈ \\(0,1\\] violated"):
            SchemeConfig(SchemeKind.standard, 1.5, 1.0)
        with pytest.raises(ConfigurationError, match="T > 0 violated"):
            SchemeConfig(SchemeKind.standard, 0.1, 0.0)
        with pytest.raises(ConfigurationError, match="⌊T/h⌋ ≥ 1"):
            SchemeConfig(SchemeKind.standard, 0.5, 0.25)
        with pytest.raises(ConfigurationError, match="requires a projection"):
            SchemeConfig(SchemeKind.projected, 0.1, 1.0)
        with pytest.raises(ConfigurationError, match="noise truncation"):
            SchemeConfig(SchemeKind.truncated_noise, 1.0, 1.0)

    def test_grid(self) -> None:
        scheme = SchemeConfig(SchemeKind.standard, 0.1, 1.0)
        assert scheme.n_steps == 10
        assert scheme.times()[-1] == pytest.approx(1.0)
        assert scheme.divergence_cap() == 1e12
        projected = SchemeConfig(SchemeKind.projected, 0.1, 1.0, projection=ProjectionConfig(r=0.5))
        assert projected.divergence_cap() == math.inf

    def test_kinds(self) -> None:
        assert SchemeKind.composed.tamed and SchemeKind.composed.uses_projection
        assert SchemeKind("projected") is SchemeKind.projected and SchemeKind.projected.uses_projection
        assert len(SchemeKind) == 6
        assert SchemeKind.truncated_noise.truncated and not SchemeKind.truncated_noise.tamed
        assert SchemeKind("truncated_noise_balanced") is SchemeKind.truncated_noise_balanced

    def test_coefficients(self) -> None:
        with pytest.raises(ConfigurationError, match="requires tamed coefficients"):
            SchemeConfig(SchemeKind.balanced, 0.1, 1.0).coefficients(self.cubic)
        assert SchemeConfig(SchemeKind.standard, 0.1, 1.0).coefficients(self.cubic).name == "identity"

    def test_prepare_initial(self) -> None:
        projected = SchemeConfig(SchemeKind.projected, 0.01, 1.0, projection=ProjectionConfig(r=0.5))
        assert projected.prepare_initial(np.array([[50.0]]))[0, 0] == pytest.approx(10.0)
        standard = SchemeConfig(SchemeKind.standard, 0.01, 1.0)
        assert standard.prepare_initial(np.array([[50.0]])).tolist() == [[50.0]]

    def test_stepper_dispatch(self) -> None:
        h = 2.0**-4
        x, dW = np.array([[1.5], [-0.5]]), np.array([[0.3], [-0.2]])
        tamed = TamedCoefficients.single_g(self.cubic, _quadratic_g, alpha=0.5)
        projection = ProjectionConfig(r=0.25)
        cases = [
            (SchemeConfig(SchemeKind.standard, h, 1.0), self.cubic, step_standard(self.cubic, 0.0, x, dW, h)),
            (SchemeConfig(SchemeKind.balanced, h, 1.0), tamed, step_balanced(tamed, 0.0, x, dW, h)),
            (
                SchemeConfig(SchemeKind.projected, h, 1.0, projection=projection),
                self.cubic,
                step_projected(self.cubic, projection, 0.0, x, dW, h),
            ),
            (
                SchemeConfig(SchemeKind.composed, h, 1.0, taming=tamed, projection=projection),
                self.cubic,
                step_composed(tamed, projection, 0.0, x, dW, h),
            ),
            (
                SchemeConfig(SchemeKind.truncated_noise, h, 1.0),
                self.cubic,
                step_truncated_noise(self.cubic, 0.0, x, dW / math.sqrt(h), h),
            ),
        ]
        for scheme, system, expected in cases:
            np.testing.assert_allclose(scheme.stepper(system)(0.0, x, dW), expected, rtol=1e-15)
