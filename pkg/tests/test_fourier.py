from __future__ import annotations

# Built-in
import math
import warnings

# Third-Party
import numpy as np
import pandas as pd
import pytest

# This project
from vmmmapy.errors import AliasingWarning, DomainError, GridMismatchError, NotACovarianceError, TruncationWarning
from vmmmapy.fourier import (
    CovarianceTable,
    SpectralDensity,
    centered_dft,
    correlation_from_spectral,
    frequency_grid,
    kernel_from_covariance,
    kernel_from_separable_covariance,
    roundtrip_error,
    selfsim_spectral,
    spectral_from_kernel,
    vmma_equivalent,
)
from vmmmapy.kernels import GridSpec, Kernel, KernelTable, SupOU
from vmmmapy.levy import MixingMeasure


class TestCenteredDft:
    """Transforms on lattices centred around zero"""

    def test_delta_at_centre(self):
        values = np.zeros(7)
        values[3] = 1.0
        np.testing.assert_allclose(centered_dft(values, (0,)), np.ones(7))

    @pytest.mark.parametrize("count", [6, 7])
    def test_inverse(self, count):
        values = np.random.default_rng(0).standard_normal(count)
        forward = centered_dft(values, (0,))
        np.testing.assert_allclose(centered_dft(forward, (0,), sign=1) / count, values, atol=1e-12)

    def test_frequency_grid(self):
        frequencies = frequency_grid(GridSpec.symmetric(0.5, 8))
        assert frequencies.is_symmetric()
        assert frequencies.step[0] == pytest.approx(2.0 * math.pi / 4.0)


class TestSpectralFromKernel:
    """Spectral densities of tabulated kernels"""

    def test_parseval(self):
        table = Kernel(SupOU(1.0)).table(0.1)
        spectrum = spectral_from_kernel(table)
        assert spectrum.integral() == pytest.approx(float(table.g_tilde().sum()) * 0.1, rel=1e-10)
        assert spectrum.is_even()

    def test_correlation_matches_lattice_autocorrelation(self):
        table = Kernel(SupOU(1.0)).table(0.1)
        spectrum = spectral_from_kernel(table)
        values = table.values[0]
        expected = float(np.sum(values[:-10] * values[10:])) / float(np.sum(values**2))
        assert correlation_from_spectral(spectrum, 1.0) == pytest.approx(expected, rel=1e-8)
        assert correlation_from_spectral(spectrum, 0.0) == pytest.approx(1.0)

    def test_needs_a_grid(self):
        with pytest.raises(ValueError, match="lag grid"):
            spectral_from_kernel(Kernel(SupOU(1.0)))

    def test_short_window_is_aliased(self):
        with pytest.warns(AliasingWarning, match="aliased"):
            spectral_from_kernel(Kernel(SupOU(1.0)), GridSpec.lag_window((0.1,), (0,), (10,)))

    def test_mixed_kernel_is_weighted(self):
        mixing = MixingMeasure.discrete([((1.0,), 0.5), ((2.0,), 0.5)])
        table = Kernel(SupOU(1.0), mixing, ("rate",)).table(0.1)
        spectrum = spectral_from_kernel(table)
        assert spectrum.integral() == pytest.approx(float(table.g_tilde().sum()) * 0.1, rel=1e-10)

    def test_negative_density(self):
        with pytest.raises(ValueError, match="nonnegative"):
            SpectralDensity(frequency_grid(GridSpec.symmetric(1.0, 3)), np.array([1.0, -1.0, 1.0]))

    def test_vanishing_density(self):
        spectrum = SpectralDensity(frequency_grid(GridSpec.symmetric(1.0, 5)), np.zeros(5))
        np.testing.assert_array_equal(correlation_from_spectral(spectrum, np.array([0.0, 1.0])), [0.0, 0.0])


class TestCovarianceTable:
    """Target covariances on symmetric lag lattices"""

    def test_gaussian(self):
        table = CovarianceTable.gaussian(1.0, 0.05, 401, variance=2.0)
        assert table.variance == 2.0
        assert table.correlation().max() <= 1.0
        spectrum = table.spectral()
        assert spectrum.integral() == pytest.approx(1.0, rel=1e-6)

    def test_not_a_covariance(self):
        table = CovarianceTable.from_function(lambda h: (np.abs(h) <= 1.0).astype(float), 0.05, 401)
        with pytest.raises(NotACovarianceError, match="not a covariance"):
            table.spectral()

    def test_variance_must_be_positive(self):
        with pytest.raises(NotACovarianceError):
            CovarianceTable.from_function(lambda h: np.zeros_like(h), 0.1, 11)

    def test_frame_with_zero_lag(self):
        lags = GridSpec.symmetric(0.5, 9).axes()[0]
        table = CovarianceTable.from_frame(pd.DataFrame({"lag": lags, "value": np.exp(-np.abs(lags))}))
        assert table.variance == pytest.approx(1.0)

    def test_lags_must_include_zero(self):
        lags = GridSpec.symmetric(0.1, 10).axes()[0]
        with pytest.raises(GridMismatchError, match="include zero"):
            CovarianceTable.from_frame(pd.DataFrame({"lag": lags, "value": 3.0 - lags**2}))
        with pytest.raises(GridMismatchError, match="include zero"):
            CovarianceTable.gaussian(1.0, 0.05, 400)

    def test_padded(self):
        table = CovarianceTable.exponential(0.5, 0.05, 11, variance=2.0)
        padded = table.padded(21)
        assert padded.lags.is_symmetric()
        np.testing.assert_array_equal(padded.values[5:16], table.values)
        assert padded.values[:5].sum() == 0.0
        with pytest.raises(GridMismatchError):
            table.padded(20)

    def test_odd_root_count(self):
        table = CovarianceTable.exponential(0.5, 0.05, 401)
        count = table.odd_root_count()
        assert count % 2 == 1
        assert float(table.correlation().sum()) / count <= 4e-4

    def test_frame_uneven_lags(self):
        frame = pd.DataFrame({"lag": [-1.0, 0.0, 2.0], "value": [0.5, 1.0, 0.5]})
        with pytest.raises(ValueError, match="evenly spaced"):
            CovarianceTable.from_frame(frame)


class TestKernelDesign:
    """Kernels realising a target covariance"""

    @pytest.mark.parametrize("root, tolerance", [("even", 1e-6), ("odd", 1e-3)])
    @pytest.mark.parametrize("kind", ["gaussian", "exponential"])
    def test_roundtrip(self, kind, root, tolerance):
        factory = CovarianceTable.gaussian if kind == "gaussian" else CovarianceTable.exponential
        designed = kernel_from_covariance(factory(0.5, 0.05, 401), root)
        assert roundtrip_error(designed) < tolerance
        values = designed.family.values
        mirrored = np.flip(values) if root == "even" else -np.flip(values)
        np.testing.assert_allclose(values, mirrored, atol=1e-12)

    def test_report(self):
        report = kernel_from_covariance(CovarianceTable.gaussian(0.5, 0.05, 401, variance=3.0)).to_dict()
        assert report["root"] == "even"
        assert report["roundtrip_error"] < 1e-6

    def test_odd_root_on_the_lattice_through_zero(self):
        target = CovarianceTable.exponential(0.5, 0.05, 401, variance=2.0)
        designed = kernel_from_covariance(target, "odd")
        count = designed.family.grid.count[0]
        assert count == target.odd_root_count()
        assert designed.target is target
        assert designed.spectrum.values[count // 2] == 0.0
        np.testing.assert_allclose(designed.family.values, -np.flip(designed.family.values), atol=1e-12)

    def test_odd_and_even_roots_share_the_spectrum(self):
        odd = kernel_from_covariance(CovarianceTable.exponential(0.5, 0.05, 401), "odd")
        count = odd.family.grid.count[0]
        even = kernel_from_covariance(odd.target.padded(count), "even")
        assert even.family.grid.count == odd.family.grid.count

        def periodic(designed):
            family = designed.family
            table = KernelTable(family.grid, family.values[np.newaxis], np.ones(1))
            return spectral_from_kernel(table, padding="periodic").values

        odd_spectrum, even_spectrum = periodic(odd), periodic(even)
        nonzero = np.arange(count) != count // 2
        np.testing.assert_allclose(odd_spectrum[nonzero], even_spectrum[nonzero], rtol=0.0, atol=1e-10)
        assert odd_spectrum[count // 2] < 1e-12

    @pytest.mark.parametrize("root", ["even", "odd"])
    def test_wide_exponential_is_a_covariance(self, root):
        target = CovarianceTable.exponential(2.0, 0.05, 401)
        assert target.spectral().values.min() >= 0.0
        designed = kernel_from_covariance(target, root)
        assert designed.root == root

    def test_unknown_root(self):
        with pytest.raises(ValueError, match="unknown root"):
            kernel_from_covariance(CovarianceTable.gaussian(1.0, 0.05, 401), "imaginary")

    def test_separable(self):
        factor = CovarianceTable.gaussian(1.0, 0.25, 65)
        designed = kernel_from_separable_covariance([factor, factor])
        assert designed.family.values.shape == (65, 65)
        single = kernel_from_covariance(factor).family.values
        np.testing.assert_allclose(designed.family.values, np.multiply.outer(single, single))

    def test_roundtrip_needs_a_target(self):
        factor = CovarianceTable.gaussian(1.0, 0.25, 65)
        with pytest.raises(ValueError, match="no target"):
            roundtrip_error(kernel_from_separable_covariance([factor]))

    def test_vmma_equivalent_keeps_the_spectrum(self):
        mixing = MixingMeasure.discrete([((1.0,), 0.5), ((2.0,), 0.5)])
        kernel = Kernel(SupOU(1.0), mixing, ("rate",))
        window = GridSpec.lag_window((0.1,), (0,), (80,))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            equivalent = vmma_equivalent(kernel, window)
        original = kernel.tabulate(window)
        assert float(np.sum(equivalent.family.values**2)) == pytest.approx(float(original.g_tilde().sum()), rel=1e-8)


class TestSelfSimilarSpectrum:
    """The series density of the Lamperti correlation"""

    def test_brownian_case(self):
        w = np.array([0.0, 0.5, 2.0])
        np.testing.assert_allclose(selfsim_spectral(0.5, w), (2.0 / math.pi) / (1.0 + 4.0 * w**2), rtol=1e-10)

    def test_brownian_case_on_a_fine_grid(self):
        w = np.linspace(-10.0, 10.0, 401)
        np.testing.assert_allclose(selfsim_spectral(0.5, w), (2.0 / math.pi) / (1.0 + 4.0 * w**2), rtol=0.0, atol=1e-8)

    def test_even(self):
        assert selfsim_spectral(0.3, -1.5) == pytest.approx(selfsim_spectral(0.3, 1.5))

    def test_domain(self):
        with pytest.raises(DomainError):
            selfsim_spectral(1.0, 0.0)

    def test_tabulated_density(self):
        frequencies = frequency_grid(GridSpec.symmetric(0.5, 64))
        density = SpectralDensity.self_similar(0.5, frequencies)
        assert density.kind == "self_similar"
        assert density.evaluate(np.array([0.0]))[0] == pytest.approx(2.0 / math.pi)
