"""Mixed kernels, their lattice tabulations and the convolution kernel k = g~ * h"""
from __future__ import annotations

# Built-in
import math
import warnings
from dataclasses import dataclass, field, fields, replace
from typing import Any, Sequence

# Third-Party
import numpy as np
from numpy.typing import ArrayLike
from scipy import signal

# This project
from vmmmapy.errors import DomainError, GridMismatchError, TruncationWarning
from vmmmapy.levy.mixing import MixingMeasure
from .families import Bounds, KernelFamily
from .grid import GridSpec

__all__: tuple[str, ...] = (
    "Kernel",
    "KernelTable",
    "eval_kernel",
    "g_tilde",
    "convolve_k",
    "convolve_tables",
    "DEFAULT_TOLERANCE",
)

DEFAULT_TOLERANCE = 1e-6
# Relative share of the total a boundary ring may carry before a truncation warning
BOUNDARY_TOLERANCE = 1e-6
# Lattice rounding slack when snapping support bounds to indices
INDEX_SLACK = 1e-9
# Lags evaluated per block in convolve_k
CHUNK = 256


@dataclass(frozen=True)
class KernelTable:
    """
    A kernel tabulated on a lattice-aligned lag window, one row per mixing node.

    ### Arguments
    - window (GridSpec): The lag window
    - values (np.ndarray): Kernel values of shape (n_nodes, *window.shape)
    - weights (np.ndarray): Mixing weights, one per node
    - truncated (tuple[tuple[bool, bool], ...]): Which window ends cut the support short

    ### Returns
    - None
    """

    window: GridSpec
    values: np.ndarray
    weights: np.ndarray
    truncated: tuple[tuple[bool, bool], ...] = ()

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if values.shape != (len(weights), *self.window.shape):
            raise GridMismatchError(f"table of shape {values.shape} does not match {len(weights)} nodes on {self.window.shape}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        if not self.truncated:
            object.__setattr__(self, "truncated", tuple((False, False) for _ in range(self.window.dim)))

    @property
    def n_nodes(self) -> int:
        return len(self.weights)

    def g_tilde(self) -> np.ndarray:
        """sum_i p_i g(x_i, z)^2 on the window"""
        return np.tensordot(self.weights, self.values**2, axes=1)

    def mixed(self) -> np.ndarray:
        """sum_i p_i g(x_i, z) on the window"""
        return np.tensordot(self.weights, self.values, axes=1)

    def boundary_fraction(self) -> float:
        """Share of the g~ mass held by the outermost cells on truncated ends"""
        tilde = self.g_tilde()
        total = float(tilde.sum())
        if total == 0.0:
            return 0.0
        ring = np.zeros(tilde.shape, dtype=bool)
        for axis, (cut_low, cut_high) in enumerate(self.truncated):
            index = [slice(None)] * tilde.ndim
            if cut_low:
                index[axis] = slice(0, 1)
                ring[tuple(index)] = True
            if cut_high:
                index[axis] = slice(-1, None)
                ring[tuple(index)] = True
        return float(tilde[ring].sum()) / total

    def check_truncation(self, tol: float = BOUNDARY_TOLERANCE) -> float:
        fraction = self.boundary_fraction()
        if fraction > tol:
            warnings.warn(
                f"kernel truncated at {self.window.to_dict()} keeps {fraction:.3g} of its mass on the boundary",
                TruncationWarning,
                stacklevel=2,
            )
        return fraction

    def flipped(self) -> KernelTable:
        """The table of z -> g(-z)"""
        window = GridSpec(
            tuple(-(o + (n - 1) * s) for o, s, n in zip(self.window.origin, self.window.step, self.window.count)),
            self.window.step,
            self.window.count,
        )
        values = np.flip(self.values, axis=tuple(range(1, self.values.ndim)))
        return KernelTable(window, values, self.weights, tuple((high, low) for low, high in self.truncated))


@dataclass(frozen=True)
class Kernel:
    """
    A weight function g(x, z) together with the mixing measure p(dx) over its parameter x.

    The mixing point overrides the family parameters named in mixed_parameters, so that e.g. a supOU kernel
    with mixed_parameters=("rate",) mixes over its rate.

    ### Arguments
    - family (KernelFamily): The kernel at the reference parameter
    - mixing (MixingMeasure): Law of the mixed parameters
    - mixed_parameters (tuple[str, ...]): Family fields replaced by the mixing point

    ### Returns
    - None
    """

    family: KernelFamily
    mixing: MixingMeasure = field(default_factory=MixingMeasure.dirac)
    mixed_parameters: tuple[str, ...] = ()
    _nodes: tuple[KernelFamily, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "mixed_parameters", tuple(self.mixed_parameters))
        if self.mixing.dimension != len(self.mixed_parameters):
            raise ValueError(
                f"mixing points of dimension {self.mixing.dimension} cannot fill parameters {self.mixed_parameters}"
            )
        names = {item.name for item in fields(self.family) if item.init}  # type: ignore[arg-type]
        unknown = set(self.mixed_parameters) - names
        if unknown:
            raise ValueError(f"{type(self.family).__name__} has no parameters {sorted(unknown)}")
        object.__setattr__(self, "_nodes", tuple(self.at(node) for node in self.mixing.nodes))

    @property
    def dim(self) -> int:
        return self.family.dim

    @property
    def nodes(self) -> tuple[KernelFamily, ...]:
        return self._nodes

    def at(self, x: Sequence[float]) -> KernelFamily:
        """The family at parameter point x"""
        if len(x) != len(self.mixed_parameters):
            raise ValueError(f"parameter point {tuple(x)} does not match {self.mixed_parameters}")
        if not self.mixed_parameters:
            return self.family
        return replace(self.family, **dict(zip(self.mixed_parameters, (float(value) for value in x))))  # type: ignore[type-var]

    def eval(self, x: Sequence[float], z: ArrayLike) -> np.ndarray | float:
        values = self.at(x).evaluate(z)
        return float(values) if values.ndim == 0 else values

    def g_tilde(self, z: ArrayLike) -> np.ndarray | float:
        values = sum(weight * node.evaluate(z) ** 2 for weight, node in zip(self.mixing.weights, self._nodes))
        values = np.asarray(values, dtype=float)
        return float(values) if values.ndim == 0 else values

    def support_box(self) -> Bounds:
        boxes = [node.support_box() for node in self._nodes]
        return tuple((min(box[axis][0] for box in boxes), max(box[axis][1] for box in boxes)) for axis in range(self.dim))

    def bounds(self, tol: float = DEFAULT_TOLERANCE) -> Bounds:
        boxes = [node.bounds(tol) for node in self._nodes]
        return tuple((min(box[axis][0] for box in boxes), max(box[axis][1] for box in boxes)) for axis in range(self.dim))

    def window(self, step: Sequence[float] | float, tol: float = DEFAULT_TOLERANCE,
               max_radius: float | None = None) -> tuple[GridSpec, tuple[tuple[bool, bool], ...]]:
        """
        The lattice-aligned lag window covering the kernel up to tol.

        ### Arguments
        - step (Sequence[float] | float): Lattice spacing
        - tol (float): Relative tail mass of g~ allowed outside the window
        - max_radius (float | None): Cap on every window extent, required for unbounded supports

        ### Returns
        - tuple[GridSpec, tuple[tuple[bool, bool], ...]]: The window and which of its ends cut the support
        """
        steps = tuple(float(value) for value in np.broadcast_to(np.asarray(step, dtype=float), (self.dim,)))
        support = self.support_box()
        bounds = self.bounds(tol)
        lower, upper, truncated = [], [], []
        for (lo, hi), (support_lo, support_hi), s in zip(bounds, support, steps):
            if max_radius is not None:
                lo, hi = max(lo, -max_radius), min(hi, max_radius)
            if math.isinf(lo) or math.isinf(hi):
                raise DomainError(f"{self.family.name} kernel has unbounded support, set max_radius")
            lower.append(math.floor(lo / s + INDEX_SLACK))
            upper.append(math.ceil(hi / s - INDEX_SLACK))
            truncated.append((lo > support_lo, hi < support_hi))
        if max_radius is not None and any(lo < -max_radius or hi > max_radius for lo, hi in bounds):
            warnings.warn(
                f"{self.family.name} kernel window clipped to radius {max_radius}", TruncationWarning, stacklevel=2
            )
        return GridSpec.lag_window(steps, lower, upper), tuple(truncated)

    def clipped_window(self, step: Sequence[float] | float, radius: float) -> GridSpec:
        """The lag window of the true support intersected with [-radius, radius]^d"""
        steps = tuple(float(value) for value in np.broadcast_to(np.asarray(step, dtype=float), (self.dim,)))
        lower, upper = [], []
        for (lo, hi), s in zip(self.support_box(), steps):
            lower.append(math.floor(max(lo, -radius) / s + INDEX_SLACK))
            upper.append(math.ceil(min(hi, radius) / s - INDEX_SLACK))
        return GridSpec.lag_window(steps, lower, upper)

    def tabulate(self, window: GridSpec, truncated: tuple[tuple[bool, bool], ...] = ()) -> KernelTable:
        """Tabulate every mixing node on a lag window"""
        if window.dim != self.dim:
            raise GridMismatchError(f"window of dimension {window.dim} for a kernel of dimension {self.dim}")
        values = np.stack([node.tabulate(window) for node in self._nodes])
        return KernelTable(window, values, self.mixing.weight_array(), truncated)

    def table(self, step: Sequence[float] | float, tol: float = DEFAULT_TOLERANCE,
              max_radius: float | None = None) -> KernelTable:
        """Tabulate on the window returned by window(), checking the truncated ends"""
        window, truncated = self.window(step, tol, max_radius)
        table = self.tabulate(window, truncated)
        table.check_truncation()
        return table

    def is_nonnegative(self, step: Sequence[float] | float, tol: float = DEFAULT_TOLERANCE,
                       max_radius: float | None = None) -> bool:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            window, _ = self.window(step, tol, max_radius)
        return bool(np.all(self.tabulate(window).values >= 0))

    def to_dict(self) -> dict[str, Any]:
        return {**self.family.to_dict(), "mixing": self.mixing.to_dict(), "mixed_parameters": list(self.mixed_parameters)}


def eval_kernel(kernel: Kernel, x: Sequence[float], z: ArrayLike) -> np.ndarray | float:
    """g(x, z), zero outside the support"""
    return kernel.eval(x, z)


def g_tilde(kernel: Kernel, z: ArrayLike) -> np.ndarray | float:
    """g~(z) = int g(x, z)^2 p(dx)"""
    return kernel.g_tilde(z)


def convolve_k(kernel_g: Kernel, kernel_h: Kernel, y: Sequence[float], z: ArrayLike, grid: GridSpec) -> np.ndarray | float:
    """
    Riemann-sum convolution k(y, z) = sum_u g~(z - u) h(y, u) cellvol over the cells u of grid.

    ### Arguments
    - kernel_g (Kernel): Kernel of the field
    - kernel_h (Kernel): Kernel of the volatility
    - y (Sequence[float]): Parameter point of h
    - z (ArrayLike): Lag(s) of shape (..., d)
    - grid (GridSpec): Cells u the sum runs over, covering the support of h

    ### Returns
    - np.ndarray | float: Nonnegative values of shape z.shape[:-1]
    """
    if kernel_g.dim != grid.dim or kernel_h.dim != grid.dim:
        raise GridMismatchError("kernels and grid must share the dimension")
    lags = np.asarray(z, dtype=float)
    if grid.dim == 1 and (lags.ndim == 0 or lags.shape[-1] != 1):
        lags = lags[..., np.newaxis]
    flat = lags.reshape(-1, grid.dim)

    cells = grid.coordinates()
    h = np.asarray(kernel_h.eval(y, cells), dtype=float)
    # Only grid ends that cut the support of h count as boundary
    ring = np.zeros(grid.shape, dtype=bool)
    for axis, ((support_lo, support_hi), coordinates, s) in enumerate(zip(kernel_h.support_box(), grid.axes(), grid.step)):
        first, last = coordinates[0], coordinates[-1]
        index: list[Any] = [slice(None)] * grid.dim
        if support_lo < first - s / 2 - INDEX_SLACK * s:
            index[axis] = 0
            ring[tuple(index)] = True
        if support_hi > last + s / 2 + INDEX_SLACK * s:
            index[axis] = -1
            ring[tuple(index)] = True

    active = h != 0
    points, weights = cells[active], h[active] * grid.cell_volume
    ring_active = ring[active]
    total = np.zeros(len(flat))
    boundary = np.zeros(len(flat))
    for start in range(0, len(flat), CHUNK):
        block = flat[start:start + CHUNK]
        contribution = np.asarray(kernel_g.g_tilde(block[:, np.newaxis, :] - points[np.newaxis]), dtype=float) * weights
        contribution = contribution.reshape(len(block), -1)
        total[start:start + CHUNK] = contribution.sum(axis=1)
        boundary[start:start + CHUNK] = contribution[:, ring_active].sum(axis=1)

    significant = total > 0
    if np.any(boundary[significant] > BOUNDARY_TOLERANCE * total[significant]):
        warnings.warn(
            f"boundary cells of {grid.to_dict()} carry more than {BOUNDARY_TOLERANCE:g} of the convolution",
            TruncationWarning,
            stacklevel=2,
        )
    result = total.reshape(lags.shape[:-1])
    return float(result) if result.ndim == 0 else result


def convolve_tables(first: np.ndarray, first_window: GridSpec, second: np.ndarray,
                    second_window: GridSpec) -> tuple[np.ndarray, GridSpec]:
    """
    Full lattice convolution (a * b)(z) = sum_u a(z - u) b(u) cellvol of two tabulated functions.

    ### Arguments
    - first (np.ndarray): Values on first_window
    - first_window (GridSpec): Its lag window
    - second (np.ndarray): Values on second_window
    - second_window (GridSpec): Its lag window, on the same step

    ### Returns
    - tuple[np.ndarray, GridSpec]: The convolution and the window it lives on
    """
    first_window._check_steps(second_window)  # pylint: disable=protected-access
    values = signal.convolve(first, second, mode="full", method="auto") * first_window.cell_volume
    window = GridSpec.lag_window(
        first_window.step,
        [a + b for a, b in zip(first_window.lower_index, second_window.lower_index)],
        [a + b for a, b in zip(first_window.upper_index, second_window.upper_index)],
    )
    return values, window
