"""Deterministic weight functions g(x, z) indexed by lag z"""
from __future__ import annotations

# Built-in
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, ClassVar, Literal

# Third-Party
import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from scipy import special
from scipy.interpolate import RegularGridInterpolator

# This project
from .grid import GridSpec

__all__: tuple[str, ...] = (
    "KernelFamily",
    "SupOU",
    "Trawl",
    "ParabolicGreen",
    "EllipticGreen",
    "HyperbolicGreen",
    "Tabulated",
    "KERNEL_FAMILIES",
)

Support = Literal["half-space", "quadrant", "all-space", "bounded"]
Bounds = tuple[tuple[float, float], ...]

# Slack when testing membership of half-open trawl sets on a lattice
TRAWL_SLACK = 1e-9


def _as_lags(z: ArrayLike, dim: int) -> np.ndarray:
    """Lags as an array of shape (..., dim)"""
    z = np.asarray(z, dtype=float)
    if dim == 1 and (z.ndim == 0 or z.shape[-1] != 1):
        z = z[..., np.newaxis]
    if z.shape[-1] != dim:
        raise ValueError(f"lags must have a trailing axis of length {dim}, got shape {z.shape}")
    return z


class KernelFamily(ABC):
    """A parametric kernel z -> g(z) with declared support and tail bounds"""

    name: ClassVar[str]
    dim: ClassVar[int] = 1
    support: ClassVar[Support]

    def evaluate(self, z: ArrayLike) -> np.ndarray:
        """
        Kernel values at lags of shape (..., d); d=1 lags may drop the trailing axis.

        ### Arguments
        - z (ArrayLike): Lag points

        ### Returns
        - np.ndarray: Values of shape z.shape[:-1], zero outside the support
        """
        lags = _as_lags(z, self.dim)
        with np.errstate(all="ignore"):
            return self._evaluate(lags)

    @abstractmethod
    def _evaluate(self, z: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def support_box(self) -> Bounds:
        """Per-axis closure of the support, infinite where unbounded"""

    @abstractmethod
    def bounds(self, tol: float) -> Bounds:
        """Per-axis box outside which g^2 carries less than tol of its mass"""

    def tabulate(self, window: GridSpec) -> np.ndarray:
        """Values on every node of a lag window"""
        return self.evaluate(window.coordinates())

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.name, "params": {item.name: getattr(self, item.name) for item in fields(self)}}  # type: ignore[arg-type]


@dataclass(frozen=True)
class SupOU(KernelFamily):
    """g(x, z) = exp(-x z) 1{z >= 0}, the Ornstein-Uhlenbeck kernel with rate x"""

    name: ClassVar[str] = "supou"
    support: ClassVar[Support] = "half-space"
    rate: float = 1.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.rate) and self.rate > 0):
            raise ValueError(f"supOU rate must be strictly positive, got {self.rate!r}")

    def _evaluate(self, z: np.ndarray) -> np.ndarray:
        lag = z[..., 0]
        return np.where(lag >= 0, np.exp(-self.rate * np.maximum(lag, 0.0)), 0.0)

    def support_box(self) -> Bounds:
        return ((0.0, math.inf),)

    def bounds(self, tol: float) -> Bounds:
        return ((0.0, math.log(1.0 / tol) / (2.0 * self.rate)),)


@dataclass(frozen=True)
class Trawl(KernelFamily):
    """
    Indicator kernel of a trawl box A = prod_j [lower_j, upper_j], so that X(t) = L(A + t).

    g(z) = 1{-z in A}, with A read as the half-open box (lower, upper] so that lattice sums reproduce leb(A).
    """

    name: ClassVar[str] = "trawl"
    support: ClassVar[Support] = "bounded"
    lower: tuple[float, ...] = (-1.0,)
    upper: tuple[float, ...] = (0.0,)

    def __post_init__(self) -> None:
        lower = tuple(float(value) for value in np.atleast_1d(self.lower))
        upper = tuple(float(value) for value in np.atleast_1d(self.upper))
        if len(lower) != len(upper):
            raise ValueError("trawl lower and upper corners must have the same dimension")
        if any(np.isnan(value) for value in lower + upper) or any(not lo < hi for lo, hi in zip(lower, upper)):
            raise ValueError(f"trawl box needs lower < upper on every axis, got {lower} and {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:  # type: ignore[override]
        return len(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in zip(self.lower, self.upper)]))

    def _evaluate(self, z: np.ndarray) -> np.ndarray:
        inside = np.ones(z.shape[:-1], dtype=bool)
        for axis, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            point = -z[..., axis]
            inside &= (point > lo + TRAWL_SLACK) & (point <= hi + TRAWL_SLACK)
        return inside.astype(float)

    def support_box(self) -> Bounds:
        return tuple((-hi, -lo) for lo, hi in zip(self.lower, self.upper))

    def bounds(self, tol: float) -> Bounds:
        return self.support_box()


@dataclass(frozen=True)
class ParabolicGreen(KernelFamily):
    """
    Green's function of a heat-type operator with space-like z1 and time-like z2:

    G(z1, z2) = -(2 gamma sqrt(pi z2))^{-1} exp(-alpha z1 - beta z2 - z1^2 gamma^2 / (4 z2)) 1{z2 > 0}
    """

    name: ClassVar[str] = "parabolic_green"
    dim: ClassVar[int] = 2
    support: ClassVar[Support] = "half-space"
    alpha: float = 0.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if not (self.gamma > 0 and self.beta > 0):
            raise ValueError("parabolic Green's function needs beta > 0 and gamma > 0")
        if not self.alpha**2 < self.beta * self.gamma**2:
            raise ValueError(f"parabolic Green's function needs alpha^2 < beta gamma^2, got {self}")

    @property
    def effective_decay(self) -> float:
        return self.beta - self.alpha**2 / self.gamma**2

    def _evaluate(self, z: np.ndarray) -> np.ndarray:
        z1, z2 = z[..., 0], z[..., 1]
        positive = z2 > 0
        safe = np.where(positive, z2, 1.0)
        value = -np.exp(-self.alpha * z1 - self.beta * safe - z1**2 * self.gamma**2 / (4.0 * safe)) / (
            2.0 * self.gamma * np.sqrt(math.pi * safe)
        )
        return np.where(positive, value, 0.0)

    def support_box(self) -> Bounds:
        return ((-math.inf, math.inf), (0.0, math.inf))

    def bounds(self, tol: float) -> Bounds:
        log_tol = math.log(1.0 / tol)
        time_radius = (log_tol + 1.0) / (2.0 * self.effective_decay)
        space_radius = 2.0 * abs(self.alpha) * time_radius / self.gamma**2 + math.sqrt(2.0 * log_tol * time_radius) / self.gamma
        return ((-space_radius, space_radius), (0.0, time_radius))


@dataclass(frozen=True)
class EllipticGreen(KernelFamily):
    """G(z) = exp(alpha z1) K0(gamma |z|) / (2 pi), singular at the origin"""

    name: ClassVar[str] = "elliptic_green"
    dim: ClassVar[int] = 2
    support: ClassVar[Support] = "all-space"
    alpha: float = 0.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if not 0 <= self.alpha < self.gamma:
            raise ValueError(f"elliptic Green's function needs 0 <= alpha < gamma, got {self}")

    def _evaluate(self, z: np.ndarray) -> np.ndarray:
        radius = np.hypot(z[..., 0], z[..., 1])
        return np.exp(self.alpha * z[..., 0]) * special.k0(self.gamma * radius) / (2.0 * math.pi)

    def origin_cell_average(self, cell_volume: float) -> float:
        """Mean of G over the disc of area cell_volume centred on the origin"""
        rho = math.sqrt(cell_volume / math.pi)
        x = self.gamma * rho
        return float(2.0 * (1.0 - x * special.k1(x)) / (self.gamma**2 * rho**2) / (2.0 * math.pi))

    def tabulate(self, window: GridSpec) -> np.ndarray:
        values = super().tabulate(window)
        try:
            origin = window.index_of((0.0, 0.0))
        except ValueError:
            return values
        if all(0 <= index < count for index, count in zip(origin, window.count)):
            values[origin] = self.origin_cell_average(window.cell_volume)
        return values

    def support_box(self) -> Bounds:
        return ((-math.inf, math.inf), (-math.inf, math.inf))

    def bounds(self, tol: float) -> Bounds:
        radius = (math.log(1.0 / tol) + 2.0) / (2.0 * (self.gamma - self.alpha))
        return ((-radius, radius), (-radius, radius))


@dataclass(frozen=True)
class HyperbolicGreen(KernelFamily):
    """G(z) = exp(-alpha z1 - beta z2) J0(2 gamma sqrt(z1 z2)) on the closed positive quadrant"""

    name: ClassVar[str] = "hyperbolic_green"
    dim: ClassVar[int] = 2
    support: ClassVar[Support] = "quadrant"
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0 and self.gamma >= 0):
            raise ValueError(f"hyperbolic Green's function needs alpha > 0, beta > 0 and gamma >= 0, got {self}")

    def _evaluate(self, z: np.ndarray) -> np.ndarray:
        z1, z2 = z[..., 0], z[..., 1]
        inside = (z1 >= 0) & (z2 >= 0)
        z1, z2 = np.maximum(z1, 0.0), np.maximum(z2, 0.0)
        value = np.exp(-self.alpha * z1 - self.beta * z2) * special.j0(2.0 * self.gamma * np.sqrt(z1 * z2))
        return np.where(inside, value, 0.0)

    def support_box(self) -> Bounds:
        return ((0.0, math.inf), (0.0, math.inf))

    def bounds(self, tol: float) -> Bounds:
        log_tol = math.log(1.0 / tol)
        return ((0.0, log_tol / (2.0 * self.alpha)), (0.0, log_tol / (2.0 * self.beta)))


@dataclass(frozen=True, eq=False)
class Tabulated(KernelFamily):
    """A kernel given by its values on a lattice, multilinear in between and zero outside"""

    name: ClassVar[str] = "tabulated"
    support: ClassVar[Support] = "bounded"
    grid: GridSpec = field(default_factory=lambda: GridSpec.regular(0.0, 1.0, 1))
    values: np.ndarray = field(default_factory=lambda: np.zeros(1))
    _interpolator: RegularGridInterpolator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("tabulated kernel values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        # Single-node axes cannot be interpolated, so they are padded by one cell of zeros on each side
        axes = []
        padded = values
        for axis, (coordinates, step) in enumerate(zip(self.grid.axes(), self.grid.step)):
            if len(coordinates) == 1:
                coordinates = np.array([coordinates[0] - step, coordinates[0], coordinates[0] + step])
                padded = np.concatenate([np.zeros_like(padded), padded, np.zeros_like(padded)], axis=axis)
            axes.append(coordinates)
        interpolator = RegularGridInterpolator(tuple(axes), padded, method="linear", bounds_error=False, fill_value=0.0)
        object.__setattr__(self, "_interpolator", interpolator)

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.grid.dim

    def _evaluate(self, z: np.ndarray) -> np.ndarray:
        return self._interpolator(z)

    def tabulate(self, window: GridSpec) -> np.ndarray:
        try:
            slices = self.grid.locate(window)
        except ValueError:
            return super().tabulate(window)
        return np.array(self.values[slices])

    def support_box(self) -> Bounds:
        return tuple((float(axis[0]), float(axis[-1])) for axis in self.grid.axes())

    def bounds(self, tol: float) -> Bounds:
        return self.support_box()

    def to_frame(self) -> pd.DataFrame:
        """Columns z1..zd followed by value, one row per node in C order"""
        frame = pd.DataFrame(self.grid.points(), columns=[f"z{axis + 1}" for axis in range(self.dim)])
        frame["value"] = self.values.ravel()
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> Tabulated:
        """Rebuild a tabulated kernel from a table with columns z1..zd and value on a full lattice"""
        columns = [column for column in frame.columns if column != "value"]
        if "value" not in frame.columns or not columns:
            raise ValueError("a kernel table needs lag columns z1..zd and a value column")
        frame = frame.sort_values(columns, kind="mergesort")
        origin, step, count = [], [], []
        for column in columns:
            axis = np.unique(frame[column].to_numpy(dtype=float))
            spacing = np.diff(axis)
            if len(axis) > 1 and not np.allclose(spacing, spacing[0], rtol=1e-6, atol=0.0):
                raise ValueError(f"column {column} is not a regular lattice axis")
            origin.append(float(axis[0]))
            step.append(float(spacing[0]) if len(axis) > 1 else 1.0)
            count.append(len(axis))
        grid = GridSpec(tuple(origin), tuple(step), tuple(count))
        if len(frame) != grid.size:
            raise ValueError(f"kernel table has {len(frame)} rows, a full lattice needs {grid.size}")
        return cls(grid, frame["value"].to_numpy(dtype=float))

    @classmethod
    def from_csv(cls, path: Path | str) -> Tabulated:
        return cls.from_frame(pd.read_csv(path))

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.name, "grid": self.grid.to_dict()}


KERNEL_FAMILIES: dict[str, type[KernelFamily]] = {
    family.name: family for family in (SupOU, Trawl, ParabolicGreen, EllipticGreen, HyperbolicGreen, Tabulated)
}
