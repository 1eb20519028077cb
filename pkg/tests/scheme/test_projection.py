"""Pytest tests for tamedlib.scheme.projection and tamedlib.scheme.noise."""

import math

from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
import numpy as np
import pytest

from tamedlib.errors import ConfigurationError
from tamedlib.scheme.noise import NoiseTruncation, truncate_noise, truncation_level
from tamedlib.scheme.projection import ProjectionConfig, ProjectionVariant

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
batches = arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 4)), elements=finite)
step_sizes = st.sampled_from([1.0, 0.5, 0.1, 2.0**-6, 2.0**-10])
variants = st.sampled_from(list(ProjectionVariant))


class TestProjection(object):
    """Projection onto the ball of radius h^{−r}."""

    def test_radius(self) -> None:
        assert ProjectionConfig(r=0.5).radius(0.01) == pytest.approx(10.0)

    def test_radial(self) -> None:
        projection = ProjectionConfig(r=0.5)
        out = projection.project(np.array([[30.0, 40.0], [1.0, 1.0]]), 0.01)
        assert out[0] == pytest.approx([6.0, 8.0])
        assert out[1].tolist() == [1.0, 1.0]

    def test_componentwise(self) -> None:
        projection = ProjectionConfig(r=1.0, variant=ProjectionVariant.componentwise)
        out = projection.project(np.array([[10.0, -10.0, 0.5]]), 0.5)
        level = 2.0 / math.sqrt(3.0)
        assert out[0] == pytest.approx([level, -level, 0.5])

    def test_nonnegative(self) -> None:
        projection = ProjectionConfig(r=1.0, variant=ProjectionVariant.nonnegative)
        assert projection.project(np.array([[-1.0], [3.0], [1.5]]), 0.5).tolist() == [[0.0], [2.0], [1.5]]

    def test_guard(self) -> None:
        with pytest.raises(ConfigurationError, match="projection exponent r > 0 violated"):
            ProjectionConfig(r=0.0)

    @settings(max_examples=200, deadline=None)
    @given(batches, step_sizes, variants, st.floats(min_value=0.05, max_value=2.0))
    def test_ball_and_idempotence(self, x: np.ndarray, h: float, variant: ProjectionVariant, r: float) -> None:
        projection = ProjectionConfig(r=r, variant=variant)
        once = projection.project(x, h)
        assert projection.contains(once, h)
        np.testing.assert_array_equal(projection.project(once, h), once)
        if variant is ProjectionVariant.nonnegative:
            assert np.all(once >= 0)

    @settings(max_examples=100, deadline=None)
    @given(batches, step_sizes)
    def test_inside_unchanged(self, x: np.ndarray, h: float) -> None:
        projection = ProjectionConfig(r=0.5)
        inside = x[np.linalg.norm(x, axis=1) <= projection.radius(h)]
        np.testing.assert_array_equal(projection.project(inside, h), inside)


class TestNoiseTruncation(object):
    """Clamping the Gaussian driver at A_h = √(2|log h|)."""

    def test_level(self) -> None:
        assert truncation_level(math.exp(-2.0)) == pytest.approx(2.0)
        assert truncation_level(2.0**-8) == pytest.approx(math.sqrt(16.0 * math.log(2.0)))

    def test_guard(self) -> None:
        with pytest.raises(ConfigurationError, match="noise truncation needs h ∈ \\(0,1\\)"):
            truncation_level(1.0)
        with pytest.raises(ConfigurationError):
            NoiseTruncation(h=1.0)

    def test_disabled(self) -> None:
        off = NoiseTruncation(h=1.0, enabled=False)
        assert off.a_h == math.inf
        assert off.apply(np.array([9.0])).tolist() == [9.0]

    @settings(max_examples=100, deadline=None)
    @given(batches, st.sampled_from([0.5, 0.1, 2.0**-6, 2.0**-12]))
    def test_clamp(self, xi: np.ndarray, h: float) -> None:
        zeta = truncate_noise(xi, h)
        level = truncation_level(h)
        assert np.all(np.abs(zeta) <= level)
        small = np.abs(xi) <= level
        np.testing.assert_array_equal(zeta[small], xi[small])
        assert NoiseTruncation(h).apply(xi).tolist() == zeta.tolist()
