from __future__ import annotations

# Third-Party
import numpy as np
import pandas as pd
import pytest

# This project
from vmmmapy.analytics import char_X, law_of
from vmmmapy.errors import GridMismatchError
from vmmmapy.kernels import GridSpec, HyperbolicGreen, Kernel, SupOU
from vmmmapy.levy import CharQuadruplet, GammaSubordinator
from vmmmapy.simulate import (
    NOISE_STREAM,
    VOLATILITY_STREAM,
    ConstantVolatility,
    FieldSample,
    ReplicationPlan,
    VmmmaModel,
    VolatilityModel,
    compute_V,
    compute_V_field,
    constant_volatility,
    jackknife,
    lagged_pairs,
    replicate,
    simulate_field,
    simulate_volatility,
    substream,
    volatility_replications,
)
from .conftest import STEP, lattice_mass

GRID = GridSpec.regular(0.0, STEP, 32)
LONG_GRID = GridSpec.regular(0.0, STEP, 128)


class TestSubstream:
    """Independent, reproducible random streams"""

    def test_reproducible(self):
        first = substream(11, 3, VOLATILITY_STREAM).standard_normal(5)
        second = substream(11, 3, VOLATILITY_STREAM).standard_normal(5)
        np.testing.assert_array_equal(first, second)

    def test_streams_differ(self):
        volatility = substream(11, 3, VOLATILITY_STREAM).standard_normal(5)
        noise = substream(11, 3, NOISE_STREAM).standard_normal(5)
        other = substream(11, 4, VOLATILITY_STREAM).standard_normal(5)
        assert not np.array_equal(volatility, noise)
        assert not np.array_equal(volatility, other)


class TestVmmmaModel:
    """Models and their cached kernel tables"""

    def test_cached_tables(self, gamma_model):
        assert gamma_model.g_table() is gamma_model.g_table()
        assert gamma_model.h_table() is gamma_model.h_table()

    def test_constant_has_no_h_table(self, gaussian_model):
        assert gaussian_model.h_table() is None
        assert gaussian_model.mean_volatility() == 1.0

    def test_mean_volatility(self, gamma_model):
        assert gamma_model.mean_volatility() == pytest.approx(lattice_mass(2.0, power=1))

    def test_volatility_grid(self, gaussian_model):
        vol_grid = gaussian_model.volatility_grid(GRID)
        assert vol_grid.count == (32 + 71 - 1,)
        assert vol_grid.origin[0] == pytest.approx(-7.0)

    def test_step_dimension(self):
        with pytest.raises(GridMismatchError):
            VmmmaModel(Kernel(SupOU(1.0)), ConstantVolatility(1.0), (0.1, 0.1))

    def test_volatility_needs_subordinator(self):
        with pytest.raises(ValueError, match="subordinator"):
            VolatilityModel(Kernel(SupOU(1.0)), CharQuadruplet.gaussian(1.0))

    def test_digest(self, gamma_model):
        again = VmmmaModel(gamma_model.kernel_g, gamma_model.volatility, gamma_model.step)
        assert again.digest() == gamma_model.digest()
        assert gamma_model.to_dict()["volatility"]["kind"] == "levy"


class TestFieldSample:
    """Values of a field on a lattice"""

    def test_nonnegative_volatility(self):
        with pytest.raises(ValueError, match="nonnegative"):
            FieldSample(GRID, -np.ones(32), "volatility")

    def test_size(self):
        with pytest.raises(GridMismatchError):
            FieldSample(GRID, np.ones(31))

    def test_at_and_frame(self):
        sample = FieldSample(GRID, np.arange(32.0), provenance={"master_seed": 1})
        assert sample.at((0.5,)) == 5.0
        with pytest.raises(GridMismatchError):
            sample.at((4.0,))
        frame = sample.to_frame()
        assert list(frame.columns) == ["t1", "value"]
        assert sample.metadata()["master_seed"] == 1

    def test_restrict(self):
        sample = FieldSample(GRID, np.arange(32.0))
        inner = GridSpec.regular(1.0, STEP, 5)
        np.testing.assert_array_equal(sample.restrict(inner).values, np.arange(10.0, 15.0))


class TestSimulateField:
    """One replication of the lattice model"""

    def test_shapes(self, gamma_model):
        field_x, vol, variance = simulate_field(gamma_model, GRID, substream(0, 0, 0), substream(0, 0, 1))
        assert field_x.values.shape == (32,)
        assert vol.grid == gamma_model.volatility_grid(GRID)
        assert variance.values.shape == (32,)
        assert np.all(vol.values >= 0)
        assert np.all(variance.values >= 0)

    def test_reproducible(self, gamma_model):
        first = simulate_field(gamma_model, GRID, substream(5, 2, 0), substream(5, 2, 1))
        second = simulate_field(gamma_model, GRID, substream(5, 2, 0), substream(5, 2, 1))
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.values, b.values)

    def test_constant_variance(self, gaussian_model):
        _, _, variance = simulate_field(gaussian_model, GRID, substream(0, 0, 0), substream(0, 0, 1))
        np.testing.assert_allclose(variance.values, lattice_mass(1.0), rtol=1e-12)

    def test_step_mismatch(self, gaussian_model):
        grid = GridSpec.regular(0.0, 0.2, 10)
        with pytest.raises(GridMismatchError, match="model step"):
            simulate_field(gaussian_model, grid, substream(0, 0, 0), substream(0, 0, 1))

    def test_compute_V_matches_field(self, gamma_model):
        vol_grid = gamma_model.volatility_grid(GRID)
        vol = simulate_volatility(gamma_model.h_table(), vol_grid, None, substream(1, 0, 0),
                                  basis=gamma_model.volatility.basis)
        table = gamma_model.g_table()
        variance = compute_V_field(table, vol, GRID)
        assert compute_V(table, vol, (0.7,)) == pytest.approx(variance.at((0.7,)), rel=1e-12)

    def test_volatility_needs_covering_grid(self, gamma_model):
        vol_grid = gamma_model.volatility_grid(GRID)
        with pytest.raises(GridMismatchError, match="does not cover"):
            simulate_volatility(gamma_model.h_table(), vol_grid, vol_grid, substream(1, 0, 0),
                                basis=gamma_model.volatility.basis)

    def test_constant_volatility(self):
        sample = constant_volatility(GRID, 2.5)
        assert sample.kind == "volatility"
        assert np.all(sample.values == 2.5)


class TestJackknife:
    """Delete-one jackknife standard errors"""

    def test_mean(self):
        data = np.random.default_rng(0).standard_normal((50, 1))
        value, se = jackknife(data, lambda means: means[0])
        assert value == pytest.approx(data.mean())
        assert se == pytest.approx(data.std(ddof=1) / np.sqrt(50))

    def test_needs_two_rows(self):
        with pytest.raises(ValueError, match="at least two"):
            jackknife(np.ones((1, 2)), lambda means: means[0])

    def test_lagged_pairs(self):
        a, b = lagged_pairs(np.arange(5.0), (2,))
        np.testing.assert_array_equal(a, [0.0, 1.0, 2.0])
        np.testing.assert_array_equal(b, [2.0, 3.0, 4.0])
        a, _ = lagged_pairs(np.arange(5.0), (5,))
        assert a.size == 0


class TestReplicate:
    """Monte Carlo replications pooled over the lattice"""

    def test_plan_needs_two_reps(self, gaussian_model):
        with pytest.raises(ValueError, match="n_reps >= 2"):
            ReplicationPlan(gaussian_model, GRID, 1)

    def test_workers_do_not_change_results(self, gamma_model):
        plan = ReplicationPlan(gamma_model, GRID, 6, 3, lags=((0.5,),), theta_grid=(1.0,), laplace_theta=(1.0,))
        serial = replicate(plan)
        threaded = replicate(ReplicationPlan(gamma_model, GRID, 6, 3, lags=((0.5,),), theta_grid=(1.0,),
                                             laplace_theta=(1.0,), workers=3))
        pd.testing.assert_frame_equal(serial.statistics, threaded.statistics)
        assert serial["covariance[0.5]"] == threaded["covariance[0.5]"]

    def test_summary_names(self, gaussian_model):
        plan = ReplicationPlan(gaussian_model, GRID, 4, lags=((0.5,),), theta_grid=(0.0, 1.0), laplace_theta=(1.0,))
        summary = replicate(plan)
        for name in ("mean", "variance", "excess_kurtosis", "mean_volatility", "mean_V", "covariance[0.5]",
                     "correlation[0.5]", "cov_squares[0.5]", "cf[0]", "cf[1]", "laplace_V[1]"):
            assert name in summary.estimates
        assert summary["cf[0]"].value == 1.0
        assert summary["mean_volatility"].value == 1.0
        assert summary.to_dict()["n_reps"] == 4

    def test_gaussian_variance(self, gaussian_model):
        summary = replicate(ReplicationPlan(gaussian_model, GRID, 200, 0))
        estimate = summary["variance"]
        assert abs(estimate.value - lattice_mass(1.0)) < 5 * estimate.se

    def test_keep_fields(self, gaussian_model):
        summary = replicate(ReplicationPlan(gaussian_model, GRID, 2, 9, keep_fields=True))
        assert len(summary.fields) == 2
        assert summary.fields[1]["field"].provenance["replication"] == 1

    def test_lag_must_fit(self, gaussian_model):
        with pytest.raises(ValueError, match="does not fit"):
            replicate(ReplicationPlan(gaussian_model, GRID, 2, lags=((5.0,),)))

    def test_volatility_replications(self, gamma_model):
        samples = list(volatility_replications(gamma_model, GRID, 3, master_seed=4))
        assert len(samples) == 3
        assert all(sample.kind == "volatility" for sample in samples)
        assert samples[0].grid == gamma_model.volatility_grid(GRID)
        assert not np.array_equal(samples[0].values, samples[1].values)

    @pytest.mark.parametrize("fixture", ["gaussian_model", "gamma_model"])
    def test_correlation_is_exponential(self, fixture, request):
        model = request.getfixturevalue(fixture)
        lags = ((0.5,), (1.0,), (2.0,))
        summary = replicate(ReplicationPlan(model, LONG_GRID, 200, 11, lags=lags))
        for (lag,) in lags:
            estimate = summary[f"correlation[{lag:g}]"]
            assert abs(estimate.value - np.exp(-lag)) < 4 * estimate.se

    @pytest.mark.parametrize("fixture", ["gaussian_model", "gamma_model"])
    def test_empirical_cf(self, fixture, request):
        model = request.getfixturevalue(fixture)
        thetas = (0.5, 1.0, 2.0)
        summary = replicate(ReplicationPlan(model, LONG_GRID, 200, 12, theta_grid=thetas))
        for theta in thetas:
            estimate = summary[f"cf[{theta:g}]"]
            assert abs(estimate.value - char_X(model, theta)) < 4 * estimate.se

    def test_stochastic_volatility_has_heavy_tails(self, gamma_model):
        estimate = replicate(ReplicationPlan(gamma_model, LONG_GRID, 400, 13))["excess_kurtosis"]
        law = law_of(gamma_model)
        assert estimate.value > 3 * estimate.se
        assert abs(estimate.value - 3.0 * law.cumulant(2) / law.mean() ** 2) < 4 * estimate.se

    def test_constant_volatility_is_gaussian(self, gaussian_model):
        estimate = replicate(ReplicationPlan(gaussian_model, LONG_GRID, 400, 13))["excess_kurtosis"]
        assert abs(estimate.value) < 3 * estimate.se

    def test_two_dimensional_hyperbolic_field(self):
        model = VmmmaModel(Kernel(HyperbolicGreen(1.0, 1.0, 0.0)), ConstantVolatility(1.0), (0.25, 0.25))
        grid = GridSpec.regular((0.0, 0.0), (0.25, 0.25), (12, 12))
        lags = ((0.5, 0.0), (0.0, 0.5), (0.5, 0.5), (1.0, 0.5))
        summary = replicate(ReplicationPlan(model, grid, 100, 14, lags=lags))
        for lag in lags:
            estimate = summary["correlation[" + ",".join(f"{value:g}" for value in lag) + "]"]
            assert abs(estimate.value - np.exp(-sum(lag))) < 4 * estimate.se
