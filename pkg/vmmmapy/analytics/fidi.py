"""Finite dimensional characteristic functions of the VMMMA field"""
from __future__ import annotations

# Built-in
from typing import Literal, Sequence

# Third-Party
import numpy as np
from numpy.typing import ArrayLike
from scipy import signal

# This project
from vmmmapy.errors import GridMismatchError, KumulantDomainError
from vmmmapy.kernels.grid import GridSpec
from vmmmapy.kernels.kernel import DEFAULT_TOLERANCE, Kernel, KernelTable
from vmmmapy.simulate.field import FieldSample
from vmmmapy.simulate.model import ConstantVolatility, VmmmaModel
from vmmmapy.simulate.montecarlo import Estimate, volatility_replications

__all__: tuple[str, ...] = ("joint_cf_conditional", "joint_cf")


def _as_configuration(points: ArrayLike, thetas: ArrayLike, dim: int) -> tuple[np.ndarray, np.ndarray]:
    theta_array = np.atleast_1d(np.asarray(thetas, dtype=float))
    point_array = np.asarray(points, dtype=float).reshape(len(theta_array), dim)
    if not np.all(np.isfinite(theta_array)):
        raise ValueError("thetas must be finite")
    return point_array, theta_array


def _combined_kernel(table: KernelTable, positions: Sequence[tuple[int, ...]], thetas: np.ndarray,
                     shape: tuple[int, ...]) -> np.ndarray:
    """
    F_x(s) = sum_j theta_j g(x, t_j - s) on a lattice, one row per mixing node.

    positions[j] is the lattice index of t_j relative to the first node of the lattice, so that s = t_j - z
    falls at positions[j] - k for the lag index k of z.
    """
    lower, upper = table.window.lower_index, table.window.upper_index
    reversed_values = np.flip(table.values, axis=tuple(range(1, table.values.ndim)))
    combined = np.zeros((table.n_nodes, *shape))
    for position, theta in zip(positions, thetas):
        if theta == 0.0:
            continue
        region = []
        for index, lo, hi, count in zip(position, lower, upper, shape):
            start, stop = index - hi, index - lo + 1
            if start < 0 or stop > count:
                raise GridMismatchError(f"the window of g around lattice index {position} leaves the volatility grid")
            region.append(slice(start, stop))
        combined[(slice(None), *region)] += theta * reversed_values
    return combined


def joint_cf_conditional(kernel_g: Kernel | KernelTable, vol: FieldSample, points: ArrayLike, thetas: ArrayLike,
                         tol: float = DEFAULT_TOLERANCE, max_radius: float | None = None) -> float:
    """
    E[exp(i sum_j theta_j X(t_j)) | sigma] = exp(-1/2 sum_x p_x sum_s (sum_j theta_j g(x, t_j - s))^2 sigma^2(s) cellvol).

    ### Arguments
    - kernel_g (Kernel | KernelTable): Kernel of the field
    - vol (FieldSample): sigma^2 covering every t_j minus the window of g
    - points (ArrayLike): The n lattice points t_j, shape (n, d)
    - thetas (ArrayLike): The n arguments theta_j
    - tol (float): Truncation tolerance when g is tabulated here
    - max_radius (float | None): Window cap when g is tabulated here

    ### Returns
    - float: A value in (0, 1]
    """
    table = kernel_g if isinstance(kernel_g, KernelTable) else kernel_g.table(vol.grid.step, tol, max_radius)
    point_array, theta_array = _as_configuration(points, thetas, vol.grid.dim)
    positions = [vol.grid.index_of(point) for point in point_array]
    combined = _combined_kernel(table, positions, theta_array, vol.grid.shape)
    squared = np.tensordot(table.weights, combined**2, axes=1)
    exponent = float(np.sum(squared * vol.values)) * vol.grid.cell_volume
    return float(np.exp(-0.5 * exponent))


def _kumulant_cf(model: VmmmaModel, point_array: np.ndarray, theta_array: np.ndarray) -> float:
    reference = GridSpec(tuple(np.zeros(model.dim)), model.step, (1,) * model.dim)
    # Repeated points are merged so the value depends on the configuration only
    merged: dict[tuple[int, ...], float] = {}
    for point, theta in zip(point_array, theta_array):
        index = reference.index_of(point)
        merged[index] = merged.get(index, 0.0) + float(theta)
    indices = np.array(list(merged), dtype=int).reshape(len(merged), model.dim)
    thetas = np.array(list(merged.values()))

    g_table = model.g_table()
    lower, upper = np.array(g_table.window.lower_index), np.array(g_table.window.upper_index)
    first = indices.min(axis=0) - upper
    shape = tuple(int(value) for value in indices.max(axis=0) - lower - first + 1)
    positions = [tuple(int(value) for value in index - first) for index in indices]
    combined = _combined_kernel(g_table, positions, thetas, shape)
    squared = np.tensordot(g_table.weights, combined**2, axes=1)
    cell_volume = model.cell_volume

    if isinstance(model.volatility, ConstantVolatility):
        return float(np.exp(-0.5 * model.volatility.value * float(squared.sum()) * cell_volume))

    h_table = model.h_table()
    assert h_table is not None
    basis = model.volatility.basis
    family = basis.levy_family
    assert family is not None
    total = 0.0
    for node, (weight, h_values) in enumerate(zip(h_table.weights, h_table.values)):
        k_values = signal.correlate(squared, h_values, mode="full", method="auto") * cell_volume
        arguments = -0.5 * np.maximum(k_values, 0.0)
        outside = ~np.isfinite(arguments) | (arguments > family.domain_bound)
        if not family.domain_closed:
            outside |= arguments == family.domain_bound
        if np.any(outside):
            cell = tuple(int(value) for value in np.unravel_index(int(np.argmax(outside)), arguments.shape))
            raise KumulantDomainError("kumulant argument outside the domain of the seed cumulant", (node, *cell))
        total += weight * cell_volume * float(np.sum(family.cumulant(arguments) + basis.residual_drift * arguments))
    return float(np.exp(total))


def joint_cf(model: VmmmaModel, points: ArrayLike, thetas: ArrayLike,
             mode: Literal["kumulant", "mc"] = "kumulant", n_reps: int = 200, master_seed: int = 0) -> Estimate:
    """
    E exp(i sum_j theta_j X(t_j)) for n lattice points.

    In kumulant mode the conditional exponent is integrated against the volatility basis through its seed
    cumulant, exactly for the lattice model. In mc mode the conditional value is averaged over volatility
    replications.

    ### Arguments
    - model (VmmmaModel): The model
    - points (ArrayLike): The n lattice points, shape (n, d)
    - thetas (ArrayLike): The n arguments
    - mode (str): "kumulant" or "mc"
    - n_reps (int): Replications in mc mode
    - master_seed (int): Seed in mc mode

    ### Returns
    - Estimate: The value and its standard error, zero in kumulant mode
    """
    point_array, theta_array = _as_configuration(points, thetas, model.dim)
    if mode == "kumulant":
        return Estimate(_kumulant_cf(model, point_array, theta_array), 0.0)
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    if n_reps < 2:
        raise ValueError("mc mode needs at least two replications")

    reference = GridSpec(tuple(np.zeros(model.dim)), model.step, (1,) * model.dim)
    indices = np.array([reference.index_of(point) for point in point_array])
    low, high = indices.min(axis=0), indices.max(axis=0)
    grid = GridSpec(tuple(low * np.array(model.step)), model.step, tuple(int(value) for value in high - low + 1))
    g_table = model.g_table()
    values = np.array([
        joint_cf_conditional(g_table, vol, point_array, theta_array)
        for vol in volatility_replications(model, grid, n_reps, master_seed)
    ])
    return Estimate(float(values.mean()), float(values.std(ddof=1) / np.sqrt(n_reps)))
