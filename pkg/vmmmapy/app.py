"""Runs the simulate, analyze, design-kernel and lamperti experiments and writes their results"""
from __future__ import annotations

# Built-in
import itertools
import math
from pathlib import Path
from typing import Any, Callable

# Third-Party
import numpy as np
import pandas as pd

# This project
from vmmmapy.analytics import (
    char_X,
    check_complete_monotonicity,
    cov_squares,
    covariance_X,
    joint_cf,
    law_of,
    variance_X,
)
from vmmmapy.config import ExperimentConfig, load_config
from vmmmapy.errors import ConfigError, MomentError
from vmmmapy.fourier import kernel_from_covariance, selfsim_spectral
from vmmmapy.lamperti import (
    MssIndex,
    mss_covariance,
    rho_min_eigenvalue,
    rho_translation_invariant,
    scaling_ratio,
    spectral_from_rho,
    stat_incr_covariance,
    to_mss,
)
from vmmmapy.reporter import Reporter
from vmmmapy.simulate import (
    NOISE_STREAM,
    VOLATILITY_STREAM,
    Estimate,
    FieldSample,
    ReplicationPlan,
    jackknife,
    replicate,
    simulate_field,
    substream,
)
from vmmmapy.tools import ResultWriter

__all__: tuple[str, ...] = ("Experiment",)

# Estimates further than this many standard errors from their reference fail a check
SE_FACTOR = 4.0
QUADRATURE_TOLERANCE = 1e-6
MONOTONE_POINTS = 50
MSS_POINTS = 5
SPECTRAL_FREQUENCIES = np.linspace(-5.0, 5.0, 21)
SPECTRAL_TOLERANCE = 1e-5
GRAM_POINTS = 200


def _check(name: str, value: float, reference: float, se: float = 0.0,
           tolerance: float = QUADRATURE_TOLERANCE) -> dict[str, Any]:
    """A comparison row: passes within SE_FACTOR standard errors, or within tolerance when se is zero"""
    allowed = SE_FACTOR * se if se > 0 else tolerance * max(1.0, abs(reference))
    return {
        "name": name,
        "value": value,
        "reference": reference,
        "se": se,
        "allowed": allowed,
        "passed": bool(abs(value - reference) <= allowed),
    }


class Experiment:
    """
    One validated configuration together with where its results go.

    ### Arguments
    - config (ExperimentConfig): The experiment
    - reporter (Reporter | None): Console reporting

    ### Returns
    - None
    """

    def __init__(self, config: ExperimentConfig, reporter: Reporter | None = None) -> None:
        self.config = config
        self.reporter = reporter or Reporter(quiet=True)
        self.writer = ResultWriter(config.output)

    @classmethod
    def from_path(cls, path: Path | str, seed: int | None = None, reps: int | None = None,
                  out: Path | None = None, reporter: Reporter | None = None) -> Experiment:
        config = load_config(path).with_overrides(seed=seed, reps=reps, out=out)
        return cls(config, reporter)

    @property
    def model(self) -> Any:
        return self.config.model

    @property
    def digest(self) -> str:
        return self.model.digest()

    def _plan(self, keep_fields: bool = False) -> ReplicationPlan:
        run = self.config.run
        return ReplicationPlan(
            self.model, self.config.grid, run.n_reps, run.master_seed, run.lags, run.theta_grid,
            run.laplace_theta, run.workers, keep_fields,
        )

    def _replication(self, replication: int) -> tuple[FieldSample, FieldSample, FieldSample]:
        seed = self.config.run.master_seed
        fields = simulate_field(
            self.model, self.config.grid,
            substream(seed, replication, VOLATILITY_STREAM), substream(seed, replication, NOISE_STREAM),
        )
        provenance = {"master_seed": seed, "replication": replication}
        return tuple(  # type: ignore[return-value]
            FieldSample(sample.grid, sample.values, sample.kind, {**sample.provenance, **provenance})
            for sample in fields
        )

    def simulate(self) -> dict[str, Any]:
        """Replicate the model, write the sampled fields and the Monte Carlo summary"""
        run = self.config.run
        self.reporter.log(f"Simulating {run.n_reps} replications on {self.config.grid.shape}")
        summary = replicate(self._plan(keep_fields=run.save_fields))
        if run.save_fields:
            kept = summary.fields
        else:
            field_x, vol, variance = self._replication(0)
            kept = [{"field": field_x, "volatility": vol, "variance_V": variance}]
        for replication, samples in enumerate(kept):
            for name, sample in samples.items():
                self.writer.field(f"{name}_{replication:04d}", sample, self.digest)

        self.writer.csv("statistics.csv", summary.statistics.reset_index(names="replication"))
        self.writer.json("summary.json", {**summary.to_dict(), "model": self.model.to_dict(), "model_digest": self.digest})
        return {name: estimate.to_dict() for name, estimate in summary.estimates.items()}

    def analyze(self) -> dict[str, Any]:
        """Evaluate every analytic quantity, compare it with Monte Carlo and write a verification report"""
        model, run = self.model, self.config.run
        law = law_of(model)
        if self.config.design is not None:
            # Rejects targets that are not covariances before any work is done
            self.config.design.covariance.spectral()

        theta = np.asarray(run.theta_grid)
        self.writer.csv("char_X.csv", pd.DataFrame({"theta": theta, "value": np.atleast_1d(char_X(model, theta))}))
        laplace_theta = np.asarray(run.laplace_theta)
        self.writer.csv(
            "laplace_V.csv", pd.DataFrame({"theta": laplace_theta, "value": np.atleast_1d(law.laplace(laplace_theta))})
        )

        self.reporter.log(f"Replicating {run.n_reps} fields for the Monte Carlo references")
        summary = replicate(self._plan())
        checks = [_check("laplace_V(0)", float(law.laplace(0.0)), 0.0, tolerance=1e-12)]

        variance = variance_X(model)
        step = 1e-6
        finite_difference = -(float(law.laplace(step)) - float(law.laplace(0.0))) / step
        checks.append(_check("variance_X finite difference", finite_difference, variance, tolerance=1e-4))
        checks.append(_check("variance_X", summary["variance"].value, variance, summary["variance"].se))

        for value in run.theta_grid:
            estimate = summary[f"cf[{value:g}]"]
            checks.append(_check(f"char_X[{value:g}]", estimate.value, float(char_X(model, value)), estimate.se))
        for value in run.laplace_theta:
            estimate = summary[f"laplace_V[{value:g}]"]
            checks.append(_check(f"laplace_V[{value:g}]", estimate.value, math.exp(law.laplace(value)), estimate.se))

        g_table = model.g_table()
        mean_vol = model.mean_volatility()
        for lag in run.lags:
            label = ",".join(f"{value:g}" for value in lag)
            estimate = summary[f"covariance[{label}]"]
            checks.append(_check(f"covariance_X[{label}]", estimate.value, covariance_X(g_table, mean_vol, lag), estimate.se))
            estimate = summary[f"correlation[{label}]"]
            reference = covariance_X(g_table, 1.0, lag) / max(covariance_X(g_table, 1.0, (0.0,) * model.dim), 1e-300)
            checks.append(_check(f"correlation_X[{label}]", estimate.value, reference, estimate.se))
            try:
                analytic = cov_squares(model, (0.0,) * model.dim, lag)
            except MomentError as error:
                self.reporter.warn(f"cov_squares[{label}] skipped: {error}")
                continue
            estimate = summary[f"cov_squares[{label}]"]
            checks.append(_check(f"cov_squares[{label}]", estimate.value, analytic.value, estimate.se))

        if run.points:
            for thetas in run.joint_thetas:
                label = ",".join(f"{value:g}" for value in thetas)
                exact = joint_cf(model, run.points, thetas, "kumulant")
                estimate = joint_cf(model, run.points, thetas, "mc", run.n_reps, run.master_seed)
                checks.append(_check(f"joint_cf[{label}]", estimate.value, exact.value, estimate.se))

        upper = max(run.laplace_theta, default=1.0) or 1.0
        monotone = check_complete_monotonicity(model, np.linspace(upper / MONOTONE_POINTS, upper, MONOTONE_POINTS))

        report = {
            "model": model.to_dict(),
            "model_digest": self.digest,
            "law": law.to_dict(),
            "checks": checks,
            "monotonicity": monotone.to_dict(),
            "passed": all(check["passed"] for check in checks) and monotone.passed,
        }
        self.writer.json("analysis.json", report)
        rows: dict[str, Any] = {check["name"]: "pass" if check["passed"] else "FAIL" for check in checks}
        rows["complete monotonicity"] = "pass" if monotone.passed else "FAIL"
        return rows

    def design_kernel(self) -> dict[str, Any]:
        """Design a kernel realising the target covariance and write it with its roundtrip error"""
        design = self.config.design
        if design is None:
            raise ConfigError("the design-kernel command needs a design block", "design")
        designed = kernel_from_covariance(design.covariance, design.root)  # type: ignore[arg-type]
        values = designed.family.values
        mirrored = np.flip(values) if design.root == "even" else -np.flip(values)
        self.writer.csv("designed_kernel.csv", designed.family.to_frame())
        self.writer.csv("spectrum.csv", designed.spectrum.to_frame())
        report = {**designed.to_dict(), "symmetry_error": float(np.max(np.abs(values - mirrored)))}
        self.writer.json("design.json", report)
        return {"root": design.root, "roundtrip_error": report["roundtrip_error"], "symmetry_error": report["symmetry_error"]}

    def _mss_points(self) -> list[tuple[float, ...]]:
        grid = self.config.grid
        steps = max(1, min(grid.count) // MSS_POINTS)
        indices = range(0, min(grid.count), steps)
        return [tuple(float(axis[i]) for axis in grid.axes()) for i in indices][:MSS_POINTS]

    def lamperti(self) -> dict[str, Any]:
        """Transform replications to an H-mss field and compare covariances and scaling with their formulas"""
        model, run, grid = self.model, self.config.run, self.config.grid
        index = MssIndex(run.hurst)
        self.reporter.log(f"Lamperti transform with H = {index.hurst}")

        samples = []
        for replication in range(run.n_reps):
            field_x, _, _ = self._replication(replication)
            transformed = to_mss(field_x, index)
            if replication == 0:
                self.writer.field("field_0000", field_x, self.digest)
                self.writer.field("mss_0000", transformed, self.digest)
            samples.append(transformed)

        g_table = model.g_table()
        mean_vol = model.mean_volatility()
        var_x0 = variance_X(model)

        def covariance(lag: np.ndarray) -> float:
            return covariance_X(g_table, mean_vol, lag)

        rows = []
        points = self._mss_points()
        for first, second in itertools.combinations_with_replacement(points, 2):
            t, s = np.exp(first), np.exp(second)
            columns = np.array([
                [sample.at(first) * sample.at(second), sample.at(first), sample.at(second)] for sample in samples
            ])
            value, se = jackknife(columns, lambda m: m[0] - m[1] * m[2])
            rows.append({
                **{f"t{axis + 1}": t[axis] for axis in range(grid.dim)},
                **{f"s{axis + 1}": s[axis] for axis in range(grid.dim)},
                "mss_covariance": mss_covariance(covariance, index, t, s),
                "stat_incr_covariance": stat_incr_covariance(index, var_x0, t, s),
                "empirical": float(value),
                "se": float(se),
            })
        self.writer.csv("mss_covariance.csv", pd.DataFrame(rows))

        scaling = []
        origin = np.exp(np.asarray(grid.origin))
        for multiple in sorted({max(1, (min(grid.count) - 1) // 2), min(grid.count) - 1}):
            if multiple < 1:
                continue
            factor = np.exp(np.asarray(grid.step) * multiple)
            estimate = scaling_ratio(samples, origin, factor)
            expected = float(np.prod(factor ** (2.0 * index.array)))
            scaling.append({**_check(f"scaling[{multiple}]", estimate.value, expected, estimate.se), "a": factor.tolist()})

        stride = max(1, grid.size // GRAM_POINTS)
        report: dict[str, Any] = {
            "hurst": list(index.hurst),
            "model_digest": self.digest,
            "var_x0": var_x0,
            "scaling": scaling,
            "rho_at_zero": float(rho_translation_invariant(index, np.zeros(grid.dim))),
            "rho_min_eigenvalue": rho_min_eigenvalue(index, grid.points()[::stride]),
        }
        if index.dim == 1 and 0 < index.hurst[0] < 1:
            series = np.atleast_1d(selfsim_spectral(index.hurst[0], SPECTRAL_FREQUENCIES))
            quadrature = np.atleast_1d(spectral_from_rho(index, SPECTRAL_FREQUENCIES))
            error = np.abs(series - quadrature)
            self.writer.csv("spectral_consistency.csv", pd.DataFrame({
                "w": SPECTRAL_FREQUENCIES, "series": series, "quadrature": quadrature, "abs_error": error,
            }))
            report["spectral_max_error"] = float(error.max())
            report["spectral_passed"] = bool(error.max() < SPECTRAL_TOLERANCE)
        self.writer.json("lamperti.json", report)

        summary: dict[str, Any] = {row["name"]: Estimate(row["value"], row["se"]).to_dict() for row in scaling}
        if "spectral_max_error" in report:
            summary["spectral max error"] = report["spectral_max_error"]
        return summary

    def command(self, name: str) -> Callable[[], dict[str, Any]]:
        commands: dict[str, Callable[[], dict[str, Any]]] = {
            "simulate": self.simulate,
            "analyze": self.analyze,
            "design-kernel": self.design_kernel,
            "lamperti": self.lamperti,
        }
        return commands[name]
