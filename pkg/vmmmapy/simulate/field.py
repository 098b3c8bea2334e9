"""Lattice simulation of the volatility field, the VMMMA field and its conditional variance"""
from __future__ import annotations

# Built-in
from dataclasses import dataclass, field
from typing import Any, Literal, Sequence

# Third-Party
import numpy as np
import pandas as pd
from scipy import signal

# This project
from vmmmapy.errors import GridMismatchError
from vmmmapy.kernels.grid import GridSpec
from vmmmapy.kernels.kernel import DEFAULT_TOLERANCE, Kernel, KernelTable
from vmmmapy.levy.basis import sample_cell_increment
from .model import ConstantVolatility, VmmmaModel, VolatilityModel

__all__: tuple[str, ...] = (
    "FieldSample",
    "simulate_volatility",
    "constant_volatility",
    "simulate_vmmma",
    "compute_V",
    "compute_V_field",
    "simulate_field",
)

FieldKind = Literal["volatility", "field", "variance_V", "mss"]


@dataclass(frozen=True, eq=False)
class FieldSample:
    """
    Values of a scalar field on every node of a lattice.

    ### Arguments
    - grid (GridSpec): The lattice
    - values (np.ndarray): Array of shape grid.shape
    - kind (str): "volatility", "field", "variance_V" or "mss"
    - provenance (dict[str, Any]): Seed, substream key and whatever else produced the sample

    ### Returns
    - None
    """

    grid: GridSpec
    values: np.ndarray
    kind: FieldKind = "field"
    provenance: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.size != self.grid.size:
            raise GridMismatchError(f"{values.size} values for a grid of {self.grid.size} nodes")
        values = values.reshape(self.grid.shape)
        if self.kind in ("volatility", "variance_V") and np.any(values < 0):
            raise ValueError(f"a {self.kind} sample must be nonnegative")
        object.__setattr__(self, "values", values)

    def at(self, point: Sequence[float]) -> float:
        """Value at a lattice point, in lattice coordinates"""
        index = self.grid.index_of(point)
        if any(not 0 <= i < n for i, n in zip(index, self.grid.count)):
            raise GridMismatchError(f"{tuple(point)} is outside {self.grid}")
        return float(self.values[index])

    def restrict(self, inner: GridSpec) -> FieldSample:
        return FieldSample(inner, self.values[self.grid.locate(inner)], self.kind, dict(self.provenance))

    def to_frame(self) -> pd.DataFrame:
        """Columns t1..td with physical coordinates, then value"""
        axes = self.grid.physical_axes()
        coordinates = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.grid.dim)
        frame = pd.DataFrame(coordinates, columns=[f"t{axis + 1}" for axis in range(self.grid.dim)])
        frame["value"] = self.values.ravel()
        return frame

    def metadata(self) -> dict[str, Any]:
        return {"grid": self.grid.to_dict(), "kind": self.kind, **self.provenance}


def _resolve_table(kernel: Kernel | KernelTable, step: Sequence[float], tol: float,
                   max_radius: float | None) -> KernelTable:
    if isinstance(kernel, KernelTable):
        return kernel
    return kernel.table(step, tol, max_radius)


def simulate_volatility(model: VolatilityModel | KernelTable | None, grid: GridSpec, extended_grid: GridSpec | None,
                        rng: np.random.Generator, basis: Any = None, tol: float = DEFAULT_TOLERANCE,
                        max_radius: float | None = None) -> FieldSample:
    """
    sigma^2(s) = sum_y sum_u h(y, s - u) L_y(u) on grid, from independent basis cells on extended_grid.

    ### Arguments
    - model (VolatilityModel | KernelTable | None): The volatility model, or a table of h together with basis
    - grid (GridSpec): Lattice where sigma^2 is wanted
    - extended_grid (GridSpec | None): Lattice of basis cells, at least grid dilated by the window of h
    - rng (np.random.Generator): Stream for the basis draws
    - basis (CharQuadruplet | None): The basis when model is a table
    - tol (float): Truncation tolerance when model is tabulated here
    - max_radius (float | None): Window cap when model is tabulated here

    ### Returns
    - FieldSample: Nonnegative volatility sample on grid
    """
    if isinstance(model, VolatilityModel):
        table = model.table(grid.step, tol, max_radius)
        basis = model.basis
    elif isinstance(model, KernelTable):
        table = model
        if basis is None:
            raise ValueError("a basis is needed with a tabulated volatility kernel")
    else:
        raise TypeError("simulate_volatility needs a VolatilityModel or a KernelTable")

    required = grid.dilate(table.window)
    extended_grid = required if extended_grid is None else extended_grid
    try:
        region = extended_grid.locate(required)
    except ValueError as error:
        raise GridMismatchError(f"extended grid does not cover the support of h: {error}") from error

    cell_volume = grid.cell_volume
    total = np.zeros(grid.shape)
    cells = np.zeros(extended_grid.shape)
    for weight, values in zip(table.weights, table.values):
        cells[...] = sample_cell_increment(basis, weight * cell_volume, rng, size=extended_grid.shape)
        if np.any(values != 0):
            total += signal.convolve(cells[region], values, mode="valid", method="auto")
    return FieldSample(grid, np.maximum(total, 0.0), "volatility")


def constant_volatility(grid: GridSpec, value: float) -> FieldSample:
    return FieldSample(grid, np.full(grid.shape, float(value)), "volatility", {"constant": value})


def simulate_vmmma(kernel_g: Kernel | KernelTable, vol: FieldSample, grid: GridSpec, rng: np.random.Generator,
                   tol: float = DEFAULT_TOLERANCE, max_radius: float | None = None) -> FieldSample:
    """
    X(t) = sum_x sum_s g(x, t - s) sigma(s) W_x(s), W_x(s) ~ N(0, p_x cellvol), sigma the positive root.

    ### Arguments
    - kernel_g (Kernel | KernelTable): Kernel of the field
    - vol (FieldSample): sigma^2 on grid dilated by the window of g
    - grid (GridSpec): Lattice of the field
    - rng (np.random.Generator): Stream for the Gaussian basis
    - tol (float): Truncation tolerance when g is tabulated here
    - max_radius (float | None): Window cap when g is tabulated here

    ### Returns
    - FieldSample: The conditionally Gaussian field
    """
    table = _resolve_table(kernel_g, grid.step, tol, max_radius)
    required = grid.dilate(table.window)
    if vol.grid.shape != required.shape:
        raise GridMismatchError(f"volatility grid {vol.grid.shape} does not match the required {required.shape}")
    sigma = np.sqrt(np.maximum(vol.values, 0.0))

    total = np.zeros(grid.shape)
    for weight, values in zip(table.weights, table.values):
        noise = rng.standard_normal(required.shape) * np.sqrt(weight * grid.cell_volume)
        if np.any(values != 0):
            total += signal.convolve(sigma * noise, values, mode="valid", method="auto")
    return FieldSample(grid, total, "field")


def compute_V_field(kernel_g: Kernel | KernelTable, vol: FieldSample, grid: GridSpec,  # pylint: disable=invalid-name
                    tol: float = DEFAULT_TOLERANCE, max_radius: float | None = None) -> FieldSample:
    """V(t) = sum_s g~(t - s) sigma^2(s) cellvol on every node of grid"""
    table = _resolve_table(kernel_g, grid.step, tol, max_radius)
    required = grid.dilate(table.window)
    if vol.grid.shape != required.shape:
        raise GridMismatchError(f"volatility grid {vol.grid.shape} does not match the required {required.shape}")
    values = signal.convolve(vol.values, table.g_tilde(), mode="valid", method="auto") * grid.cell_volume
    return FieldSample(grid, np.maximum(values, 0.0), "variance_V")


def compute_V(kernel_g: Kernel | KernelTable, vol: FieldSample, t: Sequence[float],  # pylint: disable=invalid-name
              tol: float = DEFAULT_TOLERANCE, max_radius: float | None = None) -> float:
    """
    The conditional variance V(t) = int g^2(x, t - s) sigma^2(s) p(dx) ds as a lattice sum.

    ### Arguments
    - kernel_g (Kernel | KernelTable): Kernel of the field
    - vol (FieldSample): sigma^2 covering t minus the window of g
    - t (Sequence[float]): Lattice point
    - tol (float): Truncation tolerance when g is tabulated here
    - max_radius (float | None): Window cap when g is tabulated here

    ### Returns
    - float: V(t) >= 0
    """
    table = _resolve_table(kernel_g, vol.grid.step, tol, max_radius)
    point = GridSpec(tuple(np.atleast_1d(np.asarray(t, dtype=float))), vol.grid.step, (1,) * vol.grid.dim)
    return float(compute_V_field(table, vol.restrict(point.dilate(table.window)), point).values.ravel()[0])


def simulate_field(model: VmmmaModel, grid: GridSpec, vol_rng: np.random.Generator,
                   noise_rng: np.random.Generator) -> tuple[FieldSample, FieldSample, FieldSample]:
    """
    One replication of the model on grid.

    ### Arguments
    - model (VmmmaModel): The model
    - grid (GridSpec): Target lattice, on the model step
    - vol_rng (np.random.Generator): Stream of the volatility basis
    - noise_rng (np.random.Generator): Stream of the Gaussian basis

    ### Returns
    - tuple[FieldSample, FieldSample, FieldSample]: X on grid, sigma^2 on its extended grid, V on grid
    """
    if not np.allclose(grid.step, model.step, rtol=1e-12, atol=0.0):
        raise GridMismatchError(f"grid step {grid.step} differs from the model step {model.step}")
    g_table = model.g_table()
    vol_grid = model.volatility_grid(grid)
    if isinstance(model.volatility, ConstantVolatility):
        vol = constant_volatility(vol_grid, model.volatility.value)
    else:
        h_table = model.h_table()
        assert h_table is not None
        vol = simulate_volatility(h_table, vol_grid, None, vol_rng, basis=model.volatility.basis)
    field_x = simulate_vmmma(g_table, vol, grid, noise_rng)
    variance = compute_V_field(g_table, vol, grid)
    return field_x, vol, variance
