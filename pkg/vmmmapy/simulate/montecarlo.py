"""Monte Carlo replication of the VMMMA field with jackknife standard errors"""
from __future__ import annotations

# Built-in
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Sequence

# Third-Party
import numpy as np
import pandas as pd

# This project
from vmmmapy.kernels.grid import GridSpec
from vmmmapy.threads import run_queued
from .field import FieldSample, constant_volatility, simulate_field, simulate_volatility
from .model import ConstantVolatility, VmmmaModel
from .rng import NOISE_STREAM, VOLATILITY_STREAM, substream

__all__: tuple[str, ...] = (
    "Estimate",
    "ReplicationPlan",
    "MonteCarloSummary",
    "jackknife",
    "lagged_pairs",
    "replicate",
    "volatility_replications",
)


@dataclass(frozen=True)
class Estimate:
    """A point estimate with its standard error"""

    value: float
    se: float

    def to_dict(self) -> dict[str, float]:
        return {"value": self.value, "se": self.se}


def jackknife(columns: np.ndarray, estimator: Callable[[np.ndarray], Any]) -> tuple[np.ndarray, np.ndarray]:
    """
    Delete-one jackknife of a smooth function of column means.

    ### Arguments
    - columns (np.ndarray): Per-replication statistics of shape (n, k)
    - estimator (Callable): Maps a vector of k means to the estimate(s)

    ### Returns
    - tuple[np.ndarray, np.ndarray]: Estimate at the full means and its standard error
    """
    columns = np.asarray(columns, dtype=float)
    n = columns.shape[0]
    if n < 2:
        raise ValueError("the jackknife needs at least two replications")
    total = columns.sum(axis=0)
    estimate = np.asarray(estimator(total / n), dtype=float)
    leave_one_out = np.stack([np.asarray(estimator((total - row) / (n - 1)), dtype=float) for row in columns])
    spread = leave_one_out - leave_one_out.mean(axis=0)
    se = np.sqrt((n - 1) / n * np.sum(spread**2, axis=0))
    return estimate, se


def lagged_pairs(values: np.ndarray, lag: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """All pairs (X(t), X(t + lag)) with both points on the lattice"""
    first, second = [], []
    for shift, count in zip(lag, values.shape):
        if abs(shift) >= count:
            return np.empty(0), np.empty(0)
        first.append(slice(max(0, -shift), count - max(0, shift)))
        second.append(slice(max(0, shift), count + min(0, shift)))
    return values[tuple(first)].ravel(), values[tuple(second)].ravel()


@dataclass(frozen=True)
class ReplicationPlan:
    """
    ### Arguments
    - model (VmmmaModel): Model to replicate
    - grid (GridSpec): Target lattice
    - n_reps (int): Number of replications, at least 2
    - master_seed (int): Seed of every substream
    - lags (tuple[tuple[float, ...], ...]): Lags for covariances, in lattice coordinates
    - theta_grid (tuple[float, ...]): Arguments of the empirical characteristic function
    - laplace_theta (tuple[float, ...]): Arguments of the empirical Laplace transform of V
    - workers (int): Threads sharing the replications
    - keep_fields (bool): Keep every sampled field on the summary

    ### Returns
    - None
    """

    model: VmmmaModel
    grid: GridSpec
    n_reps: int
    master_seed: int = 0
    lags: tuple[tuple[float, ...], ...] = ()
    theta_grid: tuple[float, ...] = ()
    laplace_theta: tuple[float, ...] = ()
    workers: int = 1
    keep_fields: bool = False

    def __post_init__(self) -> None:
        if self.n_reps < 2:
            raise ValueError("a replication plan needs n_reps >= 2")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        object.__setattr__(self, "lags", tuple(tuple(float(v) for v in np.atleast_1d(lag)) for lag in self.lags))
        object.__setattr__(self, "theta_grid", tuple(float(v) for v in self.theta_grid))
        object.__setattr__(self, "laplace_theta", tuple(float(v) for v in self.laplace_theta))

    def lag_steps(self) -> list[tuple[int, ...]]:
        return [self.grid.lag_index(lag) for lag in self.lags]


@dataclass(frozen=True, eq=False)
class MonteCarloSummary:
    """
    Estimates pooled over lattice positions and replications, each with a jackknife standard error.

    ### Arguments
    - plan (ReplicationPlan): What was replicated
    - statistics (pd.DataFrame): One row of pooled statistics per replication
    - estimates (dict[str, Estimate]): Named estimates
    - fields (list[dict[str, FieldSample]]): Sampled fields when the plan keeps them

    ### Returns
    - None
    """

    plan: ReplicationPlan
    statistics: pd.DataFrame
    estimates: dict[str, Estimate]
    fields: list[dict[str, FieldSample]] = field(default_factory=list)

    def __getitem__(self, name: str) -> Estimate:
        return self.estimates[name]

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_reps": self.plan.n_reps,
            "master_seed": self.plan.master_seed,
            "grid": self.plan.grid.to_dict(),
            "estimates": {name: estimate.to_dict() for name, estimate in self.estimates.items()},
        }


def _statistics(plan: ReplicationPlan, lag_steps: list[tuple[int, ...]], field_x: np.ndarray,
                vol: np.ndarray, variance: np.ndarray) -> dict[str, float]:
    x = field_x.ravel()
    row = {f"m{power}": float(np.mean(x**power)) for power in range(1, 5)}
    row["vol"] = float(np.mean(vol))
    row["v"] = float(np.mean(variance))
    for index, lag in enumerate(lag_steps):
        a, b = lagged_pairs(field_x, lag)
        if a.size == 0:
            raise ValueError(f"lag {plan.lags[index]} does not fit in {plan.grid}")
        row[f"a{index}"] = float(a.mean())
        row[f"b{index}"] = float(b.mean())
        row[f"p{index}"] = float(np.mean(a * b))
        row[f"s2a{index}"] = float(np.mean(a**2))
        row[f"s2b{index}"] = float(np.mean(b**2))
        row[f"sq{index}"] = float(np.mean(a**2 * b**2))
    for index, theta in enumerate(plan.theta_grid):
        row[f"cf{index}"] = float(np.mean(np.cos(theta * x)))
    for index, theta in enumerate(plan.laplace_theta):
        row[f"lap{index}"] = float(np.mean(np.exp(-theta * variance)))
    return row


def _run_batch(plan: ReplicationPlan, indices: list[int]) -> list[tuple[int, dict[str, float], dict[str, FieldSample]]]:
    lag_steps = plan.lag_steps()
    results = []
    for replication in indices:
        field_x, vol, variance = simulate_field(
            plan.model,
            plan.grid,
            substream(plan.master_seed, replication, VOLATILITY_STREAM),
            substream(plan.master_seed, replication, NOISE_STREAM),
        )
        row = _statistics(plan, lag_steps, field_x.values, vol.values, variance.values)
        kept: dict[str, FieldSample] = {}
        if plan.keep_fields:
            provenance = {"master_seed": plan.master_seed, "replication": replication, "model": plan.model.digest()}
            kept = {
                name: FieldSample(sample.grid, sample.values, sample.kind, dict(provenance))
                for name, sample in (("field", field_x), ("volatility", vol), ("variance_V", variance))
            }
        results.append((replication, row, kept))
    return results


def _safe_ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator > 0 else 0.0


def _estimates(plan: ReplicationPlan, statistics: pd.DataFrame) -> dict[str, Estimate]:
    columns = list(statistics.columns)
    position = {name: index for index, name in enumerate(columns)}
    n_lags, n_cf, n_lap = len(plan.lags), len(plan.theta_grid), len(plan.laplace_theta)

    def estimator(means: np.ndarray) -> np.ndarray:
        def get(name: str) -> float:
            return float(means[position[name]])

        m1, m2, m3, m4 = (get(f"m{power}") for power in range(1, 5))
        variance = m2 - m1**2
        central4 = m4 - 4 * m3 * m1 + 6 * m2 * m1**2 - 3 * m1**4
        out = [m1, variance, _safe_ratio(central4, variance**2) - 3.0 if variance > 0 else 0.0, get("vol"), get("v")]
        for index in range(n_lags):
            a, b, p = get(f"a{index}"), get(f"b{index}"), get(f"p{index}")
            s2a, s2b, sq = get(f"s2a{index}"), get(f"s2b{index}"), get(f"sq{index}")
            covariance = p - a * b
            scale = (s2a - a**2) * (s2b - b**2)
            out += [covariance, _safe_ratio(covariance, np.sqrt(scale)) if scale > 0 else 0.0, sq - s2a * s2b]
        out += [get(f"cf{index}") for index in range(n_cf)]
        out += [get(f"lap{index}") for index in range(n_lap)]
        return np.asarray(out)

    names = ["mean", "variance", "excess_kurtosis", "mean_volatility", "mean_V"]
    for lag in plan.lags:
        label = ",".join(f"{value:g}" for value in lag)
        names += [f"covariance[{label}]", f"correlation[{label}]", f"cov_squares[{label}]"]
    names += [f"cf[{theta:g}]" for theta in plan.theta_grid]
    names += [f"laplace_V[{theta:g}]" for theta in plan.laplace_theta]

    values, errors = jackknife(statistics.to_numpy(), estimator)
    return {name: Estimate(float(value), float(error)) for name, value, error in zip(names, values, errors)}


def replicate(plan: ReplicationPlan) -> MonteCarloSummary:
    """
    Run plan.n_reps independent replications, replication r on the substreams (r, 0) and (r, 1).

    ### Arguments
    - plan (ReplicationPlan): What to replicate

    ### Returns
    - MonteCarloSummary: Identical for identical plans, whatever the number of workers
    """
    indices = list(range(plan.n_reps))
    if plan.workers == 1:
        batches = [_run_batch(plan, indices)]
    else:
        jobs = [
            ({"worker": worker}, lambda chunk=indices[worker::plan.workers]: _run_batch(plan, chunk))
            for worker in range(min(plan.workers, plan.n_reps))
        ]
        batches = [item["data"] for item in run_queued(jobs)]

    results = sorted((item for batch in batches for item in batch), key=lambda item: item[0])
    statistics = pd.DataFrame([row for _, row, _ in results], index=[index for index, _, _ in results])
    fields = [kept for _, _, kept in results] if plan.keep_fields else []
    return MonteCarloSummary(plan, statistics, _estimates(plan, statistics), fields)


def volatility_replications(model: VmmmaModel, grid: GridSpec, n_reps: int, master_seed: int = 0) -> Iterator[FieldSample]:
    """
    sigma^2 on the volatility grid of target lattice grid, replication r drawn from substream (r, 0).

    ### Arguments
    - model (VmmmaModel): The model
    - grid (GridSpec): Target lattice of the field
    - n_reps (int): Number of replications
    - master_seed (int): Master seed

    ### Returns
    - Iterator[FieldSample]: One volatility sample per replication
    """
    vol_grid = model.volatility_grid(grid)
    for replication in range(n_reps):
        if isinstance(model.volatility, ConstantVolatility):
            yield constant_volatility(vol_grid, model.volatility.value)
            continue
        table = model.h_table()
        assert table is not None
        rng = substream(master_seed, replication, VOLATILITY_STREAM)
        sample = simulate_volatility(table, vol_grid, None, rng, basis=model.volatility.basis)
        yield FieldSample(vol_grid, sample.values, "volatility", {"master_seed": master_seed, "replication": replication})
