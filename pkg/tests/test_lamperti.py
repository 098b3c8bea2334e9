from __future__ import annotations

# Built-in
import math

# Third-Party
import numpy as np
import pytest

# This project
from vmmmapy.analytics import TypeGLaw
from vmmmapy.errors import DomainError, GridMismatchError
from vmmmapy.fourier import selfsim_spectral
from vmmmapy.kernels import GridSpec, Kernel, SupOU
from vmmmapy.lamperti import (
    MssIndex,
    from_mss,
    mss_cf,
    mss_covariance,
    rho_min_eigenvalue,
    rho_translation_invariant,
    scaling_ratio,
    spectral_from_rho,
    stat_incr_covariance,
    to_mss,
)
from vmmmapy.simulate import ConstantVolatility, FieldSample, VmmmaModel, simulate_field, substream

LOG_GRID = GridSpec.regular(0.0, math.log(2.0), 4)


class TestMssIndex:
    """Self-similarity indices"""

    def test_positive(self):
        with pytest.raises(ValueError, match="strictly positive"):
            MssIndex((0.0,))

    def test_spectral_domain(self):
        assert MssIndex.of(0.3).require_spectral() == 0.3
        with pytest.raises(DomainError):
            MssIndex((1.5,)).require_spectral()
        with pytest.raises(DomainError):
            MssIndex((0.3, 0.4)).require_spectral()


class TestTransform:
    """Stationary fields and their multi-self-similar images"""

    def test_roundtrip(self):
        sample = FieldSample(LOG_GRID, np.arange(1.0, 5.0), provenance={"master_seed": 3})
        image = to_mss(sample, 0.5)
        assert image.kind == "mss"
        assert image.grid.scale == "exponential"
        assert image.provenance["hurst"] == [0.5]
        np.testing.assert_allclose(image.values, np.arange(1.0, 5.0) * np.sqrt([1.0, 2.0, 4.0, 8.0]))
        back = from_mss(image, 0.5)
        assert back.grid == LOG_GRID
        assert "hurst" not in back.provenance
        np.testing.assert_allclose(back.values, sample.values)

    def test_needs_log_lattice(self):
        sample = FieldSample(LOG_GRID.exponentiated(), np.ones(4))
        with pytest.raises(GridMismatchError, match="log coordinates"):
            to_mss(sample, 0.5)
        with pytest.raises(GridMismatchError, match="exponential lattice"):
            from_mss(FieldSample(LOG_GRID, np.ones(4)), 0.5)

    def test_dimension(self):
        with pytest.raises(GridMismatchError):
            to_mss(FieldSample(LOG_GRID, np.ones(4)), (0.5, 0.5))


class TestCovariances:
    """Covariances of the multi-self-similar field"""

    def test_brownian_covariance(self):
        value = mss_covariance(lambda h: float(np.exp(-np.abs(h[0]) / 2.0)), 0.5, 2.0, 3.0)
        assert value == pytest.approx(2.0)

    def test_positive_orthant(self):
        with pytest.raises(DomainError, match="positive orthant"):
            mss_covariance(lambda h: 1.0, 0.5, -1.0, 3.0)

    def test_stationary_increments(self):
        assert stat_incr_covariance(0.3, 2.0, 1.5, 1.5) == pytest.approx(2.0 * 1.5**0.6)
        assert stat_incr_covariance(0.5, 1.0, 2.0, 3.0) == pytest.approx(2.0)

    def test_stationary_increments_per_axis(self):
        hurst, t, s = (0.3, 0.6), np.array([1.0, 2.0]), np.array([3.0, 0.5])
        power = 2.0 * np.array(hurst)
        expected = 0.5 * (np.prod(t**power) + np.prod(s**power) - np.prod(np.abs(t - s) ** power))
        assert stat_incr_covariance(hurst, 1.0, t, s) == pytest.approx(expected)

    def test_mss_cf(self):
        law = TypeGLaw.deterministic(1.0)
        assert mss_cf(law, 0.5, 4.0, 1.0) == pytest.approx(math.exp(-2.0))


class TestCorrelation:
    """Correlation of the Lamperti image of a stationary-increment field"""

    def test_at_zero(self):
        assert rho_translation_invariant(0.3, 0.0) == pytest.approx(1.0)
        assert rho_translation_invariant((0.3, 0.7), np.zeros(2)) == pytest.approx(1.0)

    def test_brownian(self):
        np.testing.assert_allclose(rho_translation_invariant(0.5, np.array([2.0, -4.0])), np.exp([-1.0, -2.0]))

    def test_two_dimensional(self):
        hurst, lag = (0.3, 0.4), np.array([1.0, -2.0])
        expected = math.cosh(0.3 - 0.8) - 2.0 ** (2 * 0.7 - 1) * math.sinh(0.5) ** 0.6 * math.sinh(1.0) ** 0.8
        assert rho_translation_invariant(hurst, lag) == pytest.approx(expected, rel=1e-12)

    def test_large_lags_stay_finite(self):
        value = rho_translation_invariant(0.9, 800.0)
        assert 0.0 < value < 1e-10

    def test_lag_dimension(self):
        with pytest.raises(GridMismatchError):
            rho_translation_invariant((0.3, 0.4), np.zeros(3))

    def test_gram_two_points(self):
        assert rho_min_eigenvalue(0.5, [[0.0], [2.0]]) == pytest.approx(1.0 - math.exp(-1.0))

    def test_gram_brownian_is_positive_definite(self):
        assert rho_min_eigenvalue(0.5, np.linspace(0.0, 3.0, 7)[:, np.newaxis]) > 0.0

    def test_spectral_brownian(self):
        w = np.array([0.0, 1.0])
        np.testing.assert_allclose(spectral_from_rho(0.5, w), (2.0 / math.pi) / (1.0 + 4.0 * w**2), rtol=1e-6)

    def test_spectral_matches_series(self):
        w = np.array([0.0, 0.7, 2.0])
        np.testing.assert_allclose(spectral_from_rho(0.3, w), selfsim_spectral(0.3, w), atol=1e-5)

    @pytest.mark.parametrize("hurst", [0.2, 0.8])
    def test_spectral_quadrature_matches_series(self, hurst):
        w = np.array([0.0, 0.7, 2.0])
        np.testing.assert_allclose(spectral_from_rho(hurst, w), selfsim_spectral(hurst, w), atol=1e-5)


class TestScalingRatio:
    """Empirical variance scaling of mss samples"""

    @staticmethod
    def _samples(hurst: float) -> list[FieldSample]:
        return [to_mss(FieldSample(LOG_GRID, np.full(4, z)), hurst) for z in (1.0, -0.5, 2.0, 0.7)]

    def test_exact(self):
        estimate = scaling_ratio(self._samples(0.3), 2.0, 2.0)
        assert estimate.value == pytest.approx(2.0**0.6, rel=1e-10)

    def test_needs_two_samples(self):
        with pytest.raises(ValueError, match="at least two"):
            scaling_ratio(self._samples(0.3)[:1], 2.0, 2.0)

    @pytest.mark.parametrize("hurst", [0.3, 0.5, 0.7])
    def test_simulated_mss_field(self, hurst):
        step = math.log(2.0) / 4
        model = VmmmaModel(Kernel(SupOU(1.0)), ConstantVolatility(1.0), (step,))
        grid = GridSpec.regular(0.0, step, 16)
        samples = []
        for replication in range(300):
            field_x, _, _ = simulate_field(model, grid, substream(21, replication, 0), substream(21, replication, 1))
            samples.append(to_mss(field_x, hurst))
        estimate = scaling_ratio(samples, 2.0, 2.0)
        assert abs(estimate.value - 2.0 ** (2 * hurst)) < 4 * estimate.se

    def test_needs_exponential_lattice(self):
        samples = [FieldSample(LOG_GRID, np.full(4, z)) for z in (1.0, 2.0)]
        with pytest.raises(GridMismatchError):
            scaling_ratio(samples, 2.0, 2.0)
