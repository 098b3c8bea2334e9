from __future__ import annotations

# Third-Party
import numpy as np
import pytest
from scipy import stats

# This project
from vmmmapy.errors import DomainError
from vmmmapy.kernels import GridSpec, Kernel, SupOU
from vmmmapy.levy import (
    CharQuadruplet,
    CompoundPoisson,
    GammaSubordinator,
    InverseGaussianSubordinator,
    MixingMeasure,
    check_integrability,
    check_kernel_integrability,
    sample_cell_increment,
    seed_cumulant,
)


class TestMixingMeasure:
    """Finitely supported mixing measures"""

    def test_dirac(self):
        measure = MixingMeasure.dirac((2.0,))
        assert measure.kind == "dirac"
        assert measure.dimension == 1
        np.testing.assert_array_equal(measure.points(), [[2.0]])

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            MixingMeasure.discrete([((1.0,), 0.5), ((2.0,), 0.4)])

    def test_weights_must_be_positive(self):
        with pytest.raises(ValueError, match="strictly positive"):
            MixingMeasure.discrete([((1.0,), 1.5), ((2.0,), -0.5)])

    def test_from_distribution(self):
        measure = MixingMeasure.from_distribution("gamma", {"a": 2.0}, 5)
        assert measure.kind == "quadrature"
        assert len(measure) == 5
        assert sum(measure.weights) == pytest.approx(1.0, abs=1e-15)
        assert np.all(np.diff(measure.points()[:, 0]) > 0)

    def test_unknown_distribution(self):
        with pytest.raises(ValueError, match="not a continuous"):
            MixingMeasure.from_distribution("nope", {}, 3)


class TestLevyFamilies:
    """Closed-form seed cumulants and their domains"""

    def test_gamma_cumulant(self):
        family = GammaSubordinator(2.0, 3.0)
        theta = np.array([-1.0, 0.0, 1.0])
        np.testing.assert_allclose(family.cumulant(theta), -2.0 * np.log1p(-theta / 3.0))
        assert family.moment_cumulant(1) == pytest.approx(2.0 / 3.0)
        assert family.moment_cumulant(2) == pytest.approx(2.0 / 9.0)

    def test_gamma_domain(self):
        family = GammaSubordinator(2.0, 3.0)
        with pytest.raises(DomainError):
            family.cumulant(3.0)

    def test_inverse_gaussian_closed_domain(self):
        family = InverseGaussianSubordinator(1.5, 2.0)
        assert family.cumulant(2.0) == pytest.approx(1.5 * 2.0)
        assert family.moment_cumulant(1) == pytest.approx(1.5 / 2.0)
        with pytest.raises(DomainError):
            family.derivative(2.0, 1)

    def test_compound_poisson(self):
        family = CompoundPoisson(3.0, 0.5)
        assert family.cumulant(1.0) == pytest.approx(3.0 * np.expm1(0.5))
        assert family.moment_cumulant(2) == pytest.approx(3.0 * 0.25)
        assert family.tail_mass(0.4) == 3.0
        assert family.tail_mass(0.6) == 0.0

    def test_parameters_must_be_positive(self):
        with pytest.raises(ValueError, match="strictly positive"):
            GammaSubordinator(0.0, 1.0)

    def test_derivative_order(self):
        with pytest.raises(ValueError, match="starts at 1"):
            GammaSubordinator(1.0, 1.0).derivative(0.0, 0)

    def test_gamma_tail_mass_is_decreasing(self):
        tails = GammaSubordinator(2.0, 2.0).tail_mass(np.array([0.1, 0.5, 1.0, 4.0]))
        assert np.all(np.diff(tails) < 0)


class TestCharQuadruplet:
    """Lévy bases given by their characteristic quadruplet"""

    def test_subordinator_drift_is_filled(self):
        family = GammaSubordinator(2.0, 2.0)
        basis = CharQuadruplet.subordinator(family)
        assert basis.is_subordinator
        assert basis.drift == pytest.approx(float(family.truncated_mean(1.0)))
        assert basis.residual_drift == pytest.approx(0.0, abs=1e-15)

    def test_subordinator_drift_is_pinned(self):
        with pytest.raises(ValueError, match="zero drift after compensation"):
            CharQuadruplet(0.0, 0.0, GammaSubordinator(2.0, 2.0))

    def test_gaussian_moments(self):
        basis = CharQuadruplet.gaussian(2.0, drift=0.5)
        assert not basis.is_subordinator
        assert basis.moment_cumulant(1) == 0.5
        assert basis.moment_cumulant(2) == 2.0
        assert basis.moment_cumulant(4) == 0.0
        assert seed_cumulant(basis, 1.0) == 0.0

    def test_negative_variance(self):
        with pytest.raises(ValueError, match="nonnegative"):
            CharQuadruplet.gaussian(-1.0)


class TestSampleCellIncrement:
    """Exact increments over lattice cells"""

    def test_gamma_mean(self):
        basis = CharQuadruplet.subordinator(GammaSubordinator(2.0, 2.0))
        draws = sample_cell_increment(basis, 1.0, np.random.default_rng(3), size=(20_000,))
        assert draws.shape == (20_000,)
        assert np.all(draws >= 0)
        assert draws.mean() == pytest.approx(1.0, abs=0.03)

    def test_compound_poisson_lattice(self):
        basis = CharQuadruplet.subordinator(CompoundPoisson(2.0, 0.25))
        draws = sample_cell_increment(basis, np.full(1000, 0.5), np.random.default_rng(1))
        np.testing.assert_allclose(draws / 0.25, np.round(draws / 0.25))

    def test_gaussian_variance(self):
        basis = CharQuadruplet.gaussian(4.0)
        draws = sample_cell_increment(basis, 0.25, np.random.default_rng(5), size=(40_000,))
        assert draws.var() == pytest.approx(1.0, rel=0.05)

    def test_negative_measure(self):
        basis = CharQuadruplet.gaussian(1.0)
        with pytest.raises(ValueError, match="nonnegative"):
            sample_cell_increment(basis, np.array([0.1, -0.1]), np.random.default_rng(0))

    def test_same_stream_same_draws(self):
        basis = CharQuadruplet.subordinator(InverseGaussianSubordinator(1.0, 1.0))
        first = sample_cell_increment(basis, 0.1, np.random.default_rng(9), size=(10,))
        second = sample_cell_increment(basis, 0.1, np.random.default_rng(9), size=(10,))
        np.testing.assert_array_equal(first, second)

    @pytest.mark.parametrize("family", [GammaSubordinator(2.0, 2.0), InverseGaussianSubordinator(1.0, 1.0)])
    def test_increments_add_over_cells(self, family):
        basis = CharQuadruplet.subordinator(family)
        rng = np.random.default_rng(17)
        merged = sample_cell_increment(basis, 1.0, rng, size=(20_000,))
        split = sample_cell_increment(basis, 0.25, rng, size=(20_000, 4)).sum(axis=1)
        mean, variance = family.moment_cumulant(1), family.moment_cumulant(2)
        for draws in (merged, split):
            assert abs(draws.mean() - mean) < 4 * np.sqrt(variance / draws.size)
        assert stats.ks_2samp(merged, split).pvalue > 1e-3


class TestIntegrability:
    """Quadrature of the integrability conditions"""

    def test_gaussian_integral(self):
        grid = GridSpec.regular(0.0, 0.1, 10)
        report = check_integrability(np.ones(10), CharQuadruplet.gaussian(2.0), grid)
        assert report.finite
        assert report.values[1] == pytest.approx(2.0)
        assert report.values[2] == 0.0

    def test_cap(self):
        grid = GridSpec.regular(0.0, 0.1, 10)
        report = check_integrability(np.full(10, 1e7), CharQuadruplet.gaussian(1.0), grid)
        assert not report.finite

    def test_shape_mismatch(self):
        grid = GridSpec.regular(0.0, 0.1, 10)
        with pytest.raises(ValueError, match="do not match"):
            check_integrability(np.ones(7), CharQuadruplet.gaussian(1.0), grid)

    def test_supou_with_gamma_basis(self):
        basis = CharQuadruplet.subordinator(GammaSubordinator(2.0, 2.0))
        report = check_kernel_integrability(Kernel(SupOU(1.0)), basis, 0.1, 10.0, doublings=2)
        assert report.finite
        assert report.radii == (10.0, 20.0, 40.0)
        assert report.positive_variant is not None
        assert report.to_dict()["finite"] is True
