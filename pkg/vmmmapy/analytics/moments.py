"""Second and fourth order moments of the VMMMA field"""
from __future__ import annotations

# Built-in
import math
from typing import Literal, Sequence

# Third-Party
import numpy as np
from scipy import signal

# This project
from vmmmapy.errors import DomainError, MomentError
from vmmmapy.kernels.grid import GridSpec
from vmmmapy.kernels.kernel import DEFAULT_TOLERANCE, Kernel, KernelTable
from vmmmapy.simulate.field import compute_V_field
from vmmmapy.simulate.model import ConstantVolatility, VmmmaModel
from vmmmapy.simulate.montecarlo import Estimate, jackknife, volatility_replications
from .typeg import law_of

__all__: tuple[str, ...] = (
    "lagged_product",
    "covariance_X",
    "correlation_X",
    "variance_X",
    "mean_volatility",
    "cov_squares",
)


def _overlap(lag: Sequence[int], shape: Sequence[int]) -> tuple[tuple[slice, ...], tuple[slice, ...]] | None:
    first, second = [], []
    for shift, count in zip(lag, shape):
        if abs(shift) >= count:
            return None
        first.append(slice(max(0, -shift), count - max(0, shift)))
        second.append(slice(max(0, shift), count + min(0, shift)))
    return tuple(first), tuple(second)


def lagged_product(first: np.ndarray, second: np.ndarray, lag: Sequence[int], embed: bool = False) -> np.ndarray:
    """
    a(z) b(z + lag) over every z where both factors are tabulated.

    ### Arguments
    - first (np.ndarray): a
    - second (np.ndarray): b, of the same shape
    - lag (Sequence[int]): Shift in lattice steps
    - embed (bool): Return the product inside an array shaped like a, zero elsewhere

    ### Returns
    - np.ndarray: The product on the overlap, or embedded
    """
    overlap = _overlap(lag, first.shape)
    if overlap is None:
        return np.zeros(first.shape) if embed else np.zeros((0,) * first.ndim)
    product = first[overlap[0]] * second[overlap[1]]
    if not embed:
        return product
    out = np.zeros(first.shape)
    out[overlap[0]] = product
    return out


def _table(kernel_g: Kernel | KernelTable, step: Sequence[float] | float | None, tol: float,
           max_radius: float | None) -> KernelTable:
    if isinstance(kernel_g, KernelTable):
        return kernel_g
    if step is None:
        raise ValueError("a lattice step is needed to tabulate the kernel")
    return kernel_g.table(step, tol, max_radius)


def covariance_X(kernel_g: Kernel | KernelTable, mean_vol: float, h: Sequence[float] | float,  # pylint: disable=invalid-name
                 step: Sequence[float] | float | None = None, tol: float = DEFAULT_TOLERANCE,
                 max_radius: float | None = None) -> float:
    """
    R_X(h) = E sigma^2 sum_x p_x sum_s g(x, h + s) g(x, s) cellvol.

    ### Arguments
    - kernel_g (Kernel | KernelTable): Kernel of the field, or its table
    - mean_vol (float): E sigma^2
    - h (Sequence[float] | float): Lattice lag
    - step (Sequence[float] | float | None): Lattice spacing when kernel_g is not tabulated
    - tol (float): Truncation tolerance when tabulating
    - max_radius (float | None): Window cap when tabulating

    ### Returns
    - float: The covariance
    """
    table = _table(kernel_g, step, tol, max_radius)
    lag = table.window.lag_index(h)
    total = sum(weight * lagged_product(values, values, lag).sum() for weight, values in zip(table.weights, table.values))
    return float(mean_vol * total * table.window.cell_volume)


def correlation_X(kernel_g: Kernel | KernelTable, h: Sequence[float] | float,  # pylint: disable=invalid-name
                  step: Sequence[float] | float | None = None, tol: float = DEFAULT_TOLERANCE,
                  max_radius: float | None = None) -> float:
    """R_X(h) / R_X(0), free of the volatility; zero for a vanishing kernel"""
    table = _table(kernel_g, step, tol, max_radius)
    variance = covariance_X(table, 1.0, (0.0,) * table.window.dim)
    return covariance_X(table, 1.0, h) / variance if variance > 0 else 0.0


def variance_X(model: VmmmaModel) -> float:  # pylint: disable=invalid-name
    """Var X(t) = E V(t)"""
    return law_of(model).mean()


def mean_volatility(model: VmmmaModel) -> float:
    """E sigma^2(s)"""
    return model.mean_volatility()


def _require_fourth_moment(model: VmmmaModel) -> None:
    if isinstance(model.volatility, ConstantVolatility):
        return
    try:
        fourth = model.volatility.basis.moment_cumulant(4)
    except DomainError as error:
        raise MomentError("the volatility basis has no finite fourth moment") from error
    if not math.isfinite(fourth):
        raise MomentError("the volatility basis has no finite fourth moment")


def _analytic_cov_squares(model: VmmmaModel, lag: tuple[int, ...]) -> float:
    g_table = model.g_table()
    cross = sum(weight * lagged_product(values, values, lag) for weight, values in zip(g_table.weights, g_table.values))
    cross = np.asarray(cross, dtype=float)
    cell_volume = model.cell_volume

    if isinstance(model.volatility, ConstantVolatility):
        conditional = model.volatility.value * float(cross.sum()) * cell_volume
        return 2.0 * conditional**2

    basis = model.volatility.basis
    kappa1, kappa2 = basis.moment_cumulant(1), basis.moment_cumulant(2)
    h_table = model.h_table()
    assert h_table is not None
    law = law_of(model)

    second = first = variance_term = 0.0
    for weight, h_values, k_values in zip(h_table.weights, h_table.values, law.k_values):
        mass = weight * cell_volume
        if cross.size:
            convolution = signal.convolve(cross, h_values, mode="full", method="auto") * cell_volume
            second += mass * float(np.sum(convolution**2))
            first += mass * float(convolution.sum())
        variance_term += mass * float(lagged_product(k_values, k_values, lag).sum())
    return 2.0 * (kappa2 * second + (kappa1 * first) ** 2) + kappa2 * variance_term


def cov_squares(model: VmmmaModel, t: Sequence[float], t_star: Sequence[float],
                mode: Literal["analytic", "mc"] = "analytic", n_reps: int = 200, master_seed: int = 0,
                grid: GridSpec | None = None) -> Estimate:
    """
    Cov(X^2(t), X^2(t*)) = 2 E C(t, t*)^2 + Cov(V(t), V(t*)), C the conditional covariance of X(t) and X(t*).

    ### Arguments
    - model (VmmmaModel): The model
    - t (Sequence[float]): First lattice point
    - t_star (Sequence[float]): Second lattice point
    - mode (str): "analytic" from the seed cumulants, "mc" from volatility replications
    - n_reps (int): Replications in mc mode
    - master_seed (int): Seed in mc mode
    - grid (GridSpec | None): Lattice whose pairs at lag t* - t are pooled in mc mode

    ### Returns
    - Estimate: The value with a jackknife standard error, zero in analytic mode
    """
    first_point = np.atleast_1d(np.asarray(t, dtype=float))
    second_point = np.atleast_1d(np.asarray(t_star, dtype=float))
    reference = GridSpec(tuple(np.zeros(model.dim)), model.step, (1,) * model.dim)
    lag = reference.lag_index(second_point - first_point)
    _require_fourth_moment(model)

    if mode == "analytic":
        return Estimate(_analytic_cov_squares(model, lag), 0.0)
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")

    if grid is None:
        grid = GridSpec(
            tuple(np.minimum(first_point, second_point)), model.step, tuple(abs(shift) + 1 for shift in lag)
        )
    g_table = model.g_table()
    cross = sum(
        weight * lagged_product(values, values, lag, embed=True) for weight, values in zip(g_table.weights, g_table.values)
    )
    overlap = _overlap(lag, grid.shape)
    if overlap is None:
        raise ValueError(f"lag {tuple(lag)} does not fit in {grid}")

    rows = []
    for vol in volatility_replications(model, grid, n_reps, master_seed):
        variance = compute_V_field(g_table, vol, grid).values
        conditional = signal.convolve(vol.values, cross, mode="valid", method="auto") * model.cell_volume
        c, v_first, v_second = conditional[overlap[0]], variance[overlap[0]], variance[overlap[1]]
        rows.append([np.mean(c**2), np.mean(v_first * v_second), np.mean(v_first), np.mean(v_second)])

    value, se = jackknife(np.asarray(rows), lambda m: 2.0 * m[0] + m[1] - m[2] * m[3])
    return Estimate(float(value), float(se))
