"""Pytest tests for tamedlib.core.model."""

import numpy as np
import pytest

from tamedlib.core import catalog
from tamedlib.core.lyapunov import norm_power
from tamedlib.core.model import GrowthProfile, SdeModel, as_batch, describe, zero_model
from tamedlib.core.sampling import SampleSpec
from tamedlib.errors import ConfigurationError, DomainViolationError


def _exploding() -> SdeModel:
    """A model whose drift is infinite outside |x| ≤ 5."""

    def drift(t: float, x: np.ndarray) -> np.ndarray:
        return np.where(np.abs(x) > 5.0, np.inf, x)

    def diffusion(t: float, x: np.ndarray) -> np.ndarray:
        return x[:, :, None]

    return SdeModel("exploding", 1, 1, drift, diffusion, GrowthProfile(K=1.0))


class TestAsBatch(object):
    """Lifting points to batches."""

    def test_point(self) -> None:
        batch, single = as_batch(np.array([1.0, 2.0]), 2)
        assert batch.shape == (1, 2)
        assert single

    def test_scalar(self) -> None:
        batch, single = as_batch(np.array(3.0), 1)
        assert batch.tolist() == [[3.0]]
        assert single

    def test_batch(self) -> None:
        batch, single = as_batch(np.zeros((4, 3)), 3)
        assert batch.shape == (4, 3)
        assert not single

    def test_wrong_dim(self) -> None:
        with pytest.raises(AssertionError):
            as_batch(np.zeros((4, 2)), 3)


class TestGrowthProfile(object):
    """Guards and derived exponents."""

    def test_kappa_check(self) -> None:
        growth = GrowthProfile(K=2.0, kappa1=3.0, kappa2=2.0, q1=2.0, q2=4.0)
        assert growth.kappa_check == 3.0
        assert growth.q == 4.0

    def test_guards(self) -> None:
        with pytest.raises(ConfigurationError, match="K > 0"):
            GrowthProfile(K=0.0)
        with pytest.raises(ConfigurationError, match="kappa1 ≥ 1"):
            GrowthProfile(K=1.0, kappa1=0.5)
        with pytest.raises(ConfigurationError, match="nu > 0"):
            GrowthProfile(K=1.0, nu=0.0)


class TestSdeModel(object):
    """Evaluators and metadata of SdeModel."""

    cubic = catalog.cubic()

    def test_repr(self) -> None:
        assert repr(self.cubic) == "<SdeModel: cubic d=1 m=1>"

    def test_point_evaluation(self) -> None:
        assert self.cubic.evaluate_drift(0.0, np.array([2.0])).tolist() == [-8.0]
        assert self.cubic.evaluate_diffusion(0.0, np.array([2.0])).tolist() == [[4.0]]

    def test_batch_shapes(self) -> None:
        vdp = catalog.vdp()
        x = np.ones((5, 2))
        assert vdp.evaluate_drift(0.0, x).shape == (5, 2)
        assert vdp.evaluate_diffusion(0.0, x).shape == (5, 2, 3)

    def test_dimensions(self) -> None:
        with pytest.raises(ConfigurationError):
            SdeModel("bad", 0, 1, self.cubic.drift, self.cubic.diffusion, GrowthProfile(K=1.0))

    def test_domain_violation(self) -> None:
        model = _exploding()
        assert model.evaluate_drift(0.0, np.array([4.0])).tolist() == [4.0]
        with pytest.raises(DomainViolationError) as info:
            model.evaluate_drift(0.0, np.array([[1.0], [6.0]]))
        assert info.value.x.tolist() == [[6.0]]

    def test_check_origin(self) -> None:
        times = np.linspace(0.0, 1.0, 5)
        assert self.cubic.check_origin(times)
        assert catalog.gbm().check_origin(times)
        assert _exploding().check_origin(times)
        shifted = SdeModel(
            "shifted",
            1,
            1,
            lambda t, x: x + 1.0,
            lambda t, x: x[:, :, None],
            GrowthProfile(K=2.0),
        )
        assert not shifted.check_origin(times)

    def test_growth_ratio(self) -> None:
        # |b| ∨ |σ| = |x|³ ∨ x² ≤ 1 + |x|³
        samples = SampleSpec(n=2000).points(1)
        assert self.cubic.growth_ratio(norm_power(2).value, 0.5, samples) <= 1.0
        lorenz = catalog.lorenz()
        assert lorenz.growth_ratio(norm_power(2, dim=3).value, 0.5, SampleSpec(n=2000).points(3)) <= 1.0

    def test_zero_model(self) -> None:
        zero = zero_model(2, 3)
        x = np.ones((4, 2))
        assert not zero.evaluate_drift(0.0, x).any()
        assert zero.evaluate_diffusion(0.0, x).shape == (4, 2, 3)

    def test_describe(self) -> None:
        text = describe(self.cubic, norm_power(2))
        assert text.startswith("cubic (d=1, m=1, K=1")
        assert text.endswith("with V=norm-power-2")
