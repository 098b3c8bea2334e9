"""Rectangular lattices used for kernels, fields and lag windows"""
from __future__ import annotations

# Built-in
from dataclasses import dataclass, field
from typing import Any, Literal, Sequence

# Third-Party
import numpy as np

# This project
from vmmmapy.errors import GridMismatchError

__all__: tuple[str, ...] = ("GridSpec",)

# Relative slack when matching coordinates to lattice indices
ALIGNMENT_TOLERANCE = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """
    A rectangular d-dimensional lattice of cell midpoints.

    ### Arguments
    - origin (tuple[float, ...]): Coordinate of the first node on every axis
    - step (tuple[float, ...]): Node spacing on every axis
    - count (tuple[int, ...]): Number of nodes on every axis
    - scale (str): "linear", or "exponential" when the physical coordinates are exp of the lattice coordinates

    ### Returns
    - None
    """

    origin: tuple[float, ...]
    step: tuple[float, ...]
    count: tuple[int, ...]
    scale: Literal["linear", "exponential"] = "linear"
    _axes: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        origin = tuple(float(value) for value in self.origin)
        step = tuple(float(value) for value in self.step)
        count = tuple(int(value) for value in self.count)
        if not len(origin) == len(step) == len(count) or not origin:
            raise ValueError("origin, step and count must have the same nonzero length")
        if any(not np.isfinite(value) for value in origin):
            raise ValueError("origin must be finite")
        if any(not value > 0 for value in step):
            raise ValueError("steps must be strictly positive")
        if any(value < 1 for value in count):
            raise ValueError("counts must be at least 1")
        if self.scale not in ("linear", "exponential"):
            raise ValueError(f"unknown grid scale {self.scale!r}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "count", count)
        axes = tuple(o + np.arange(n) * s for o, s, n in zip(origin, step, count))
        for axis in axes:
            axis.setflags(write=False)
        object.__setattr__(self, "_axes", axes)

    @classmethod
    def regular(cls, origin: Sequence[float] | float, step: Sequence[float] | float,
                count: Sequence[int] | int) -> GridSpec:
        """Build a grid from scalars (d=1) or per-axis sequences"""
        return cls(tuple(np.atleast_1d(origin)), tuple(np.atleast_1d(step)), tuple(np.atleast_1d(count)))

    @classmethod
    def lag_window(cls, step: Sequence[float], lower: Sequence[int], upper: Sequence[int]) -> GridSpec:
        """
        Build the window of lags k·step for lower <= k <= upper on every axis.

        ### Arguments
        - step (Sequence[float]): Lattice spacing
        - lower (Sequence[int]): First lag index per axis
        - upper (Sequence[int]): Last lag index per axis

        ### Returns
        - GridSpec: The lag window
        """
        return cls(
            tuple(lo * s for lo, s in zip(lower, step)),
            tuple(step),
            tuple(hi - lo + 1 for lo, hi in zip(lower, upper)),
        )

    @classmethod
    def symmetric(cls, step: float, count: int) -> GridSpec:
        """Build a d=1 grid centred on zero; even counts give half-integer lags"""
        return cls(((1 - count) / 2 * step,), (step,), (count,))

    @property
    def dim(self) -> int:
        return len(self.count)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.count

    @property
    def size(self) -> int:
        return int(np.prod(self.count))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.step))

    @property
    def lower_index(self) -> tuple[int, ...]:
        """Lattice index of the origin, for grids aligned to multiples of the step"""
        return tuple(int(round(o / s)) for o, s in zip(self.origin, self.step))

    @property
    def upper_index(self) -> tuple[int, ...]:
        return tuple(lo + n - 1 for lo, n in zip(self.lower_index, self.count))

    def axes(self) -> tuple[np.ndarray, ...]:
        """Lattice coordinates along every axis"""
        return self._axes

    def physical_axes(self) -> tuple[np.ndarray, ...]:
        """Coordinates in the sample space (exponentiated for exponential grids)"""
        if self.scale == "exponential":
            return tuple(np.exp(axis) for axis in self._axes)
        return self._axes

    def coordinates(self) -> np.ndarray:
        """Lattice coordinates as an array of shape (*count, dim)"""
        return np.stack(np.meshgrid(*self._axes, indexing="ij"), axis=-1)

    def points(self) -> np.ndarray:
        """Lattice coordinates flattened to shape (size, dim), in C order"""
        return self.coordinates().reshape(-1, self.dim)

    def is_symmetric(self) -> bool:
        """True when every axis is mirror symmetric around zero"""
        return all(np.allclose(axis, -axis[::-1], atol=ALIGNMENT_TOLERANCE * s)
                   for axis, s in zip(self._axes, self.step))

    def index_of(self, point: Sequence[float]) -> tuple[int, ...]:
        """
        Locate a lattice coordinate.

        ### Arguments
        - point (Sequence[float]): Coordinate in lattice (not physical) units

        ### Returns
        - tuple[int, ...]: The node index, which may fall outside the grid
        """
        point = tuple(np.atleast_1d(np.asarray(point, dtype=float)))
        if len(point) != self.dim:
            raise GridMismatchError(f"point {point} does not have dimension {self.dim}")
        index = []
        for value, o, s in zip(point, self.origin, self.step):
            offset = (value - o) / s
            nearest = round(offset)
            if abs(offset - nearest) > ALIGNMENT_TOLERANCE:
                raise GridMismatchError(f"point {point} is not on the lattice of {self}")
            index.append(int(nearest))
        return tuple(index)

    def lag_index(self, lag: Sequence[float]) -> tuple[int, ...]:
        """Express a lag vector as an integer number of steps per axis"""
        lag = tuple(np.atleast_1d(np.asarray(lag, dtype=float)))
        if len(lag) != self.dim:
            raise GridMismatchError(f"lag {lag} does not have dimension {self.dim}")
        steps = []
        for value, s in zip(lag, self.step):
            nearest = round(value / s)
            if abs(value / s - nearest) > ALIGNMENT_TOLERANCE:
                raise GridMismatchError(f"lag {lag} is not a multiple of the step {self.step}")
            steps.append(int(nearest))
        return tuple(steps)

    def dilate(self, window: GridSpec) -> GridSpec:
        """
        The grid of source points s = t - z for t in this grid and z in a lag window.

        ### Arguments
        - window (GridSpec): A lag window built on the same step

        ### Returns
        - GridSpec: The extended grid
        """
        self._check_steps(window)
        return GridSpec(
            tuple(o - (w + (n - 1) * s) for o, w, n, s in zip(self.origin, window.origin, window.count, self.step)),
            self.step,
            tuple(n + m - 1 for n, m in zip(self.count, window.count)),
        )

    def locate(self, inner: GridSpec) -> tuple[slice, ...]:
        """
        Slices of this grid that reproduce an aligned sub-grid.

        ### Arguments
        - inner (GridSpec): The grid to locate

        ### Returns
        - tuple[slice, ...]: Index slices, raising GridMismatchError if inner is not covered
        """
        self._check_steps(inner)
        start = self.index_of(inner.origin)
        slices = []
        for first, n, total in zip(start, inner.count, self.count):
            if first < 0 or first + n > total:
                raise GridMismatchError(f"{inner} is not covered by {self}")
            slices.append(slice(first, first + n))
        return tuple(slices)

    def exponentiated(self) -> GridSpec:
        return GridSpec(self.origin, self.step, self.count, "exponential")

    def logarithmic(self) -> GridSpec:
        return GridSpec(self.origin, self.step, self.count, "linear")

    def with_step(self, factor: float) -> GridSpec:
        """Same extent sampled with the step multiplied by factor"""
        return GridSpec(
            self.origin,
            tuple(s * factor for s in self.step),
            tuple(max(1, int(round((n - 1) / factor)) + 1) for n in self.count),
            self.scale,
        )

    def _check_steps(self, other: GridSpec) -> None:
        if other.dim != self.dim or not np.allclose(other.step, self.step, rtol=1e-12, atol=0.0):
            raise GridMismatchError(f"{other} does not share the lattice step of {self}")

    def to_dict(self) -> dict[str, Any]:
        return {"origin": list(self.origin), "step": list(self.step), "count": list(self.count), "scale": self.scale}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GridSpec:
        return cls(tuple(data["origin"]), tuple(data["step"]), tuple(data["count"]), data.get("scale", "linear"))
