"""Numeric checks of the integrability conditions of a kernel against a Lévy basis"""
from __future__ import annotations

# Built-in
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

# Third-Party
import numpy as np
from numpy.typing import ArrayLike

# This project
from vmmmapy.kernels.grid import GridSpec
from .basis import CharQuadruplet

if TYPE_CHECKING:
    from vmmmapy.kernels.kernel import Kernel

__all__: tuple[str, ...] = ("IntegrabilityReport", "check_integrability", "check_kernel_integrability")

# Finite reports stay below this
DEFAULT_CAP = 1e12
# A radius doubling that moves any integral by more than this flags divergence
DIVERGENCE_RATIO = 0.1


@dataclass(frozen=True)
class IntegrabilityReport:
    """
    ### Arguments
    - finite (bool): All three integrals finite and below the cap
    - values (tuple[float, float, float]): Compensation, Gaussian and jump-measure integrals
    - positive_variant (float | None): The positive-kernel condition for subordinators
    - radii (tuple[float, ...]): Truncation radii visited by a doubling check
    - history (tuple[tuple[float, float, float], ...]): Values at every radius

    ### Returns
    - None
    """

    finite: bool
    values: tuple[float, float, float]
    positive_variant: float | None = None
    radii: tuple[float, ...] = ()
    history: tuple[tuple[float, float, float], ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        return {
            "finite": self.finite,
            "values": {"compensation": self.values[0], "gaussian": self.values[1], "jumps": self.values[2]},
            "positive_variant": self.positive_variant,
            "radii": list(self.radii),
            "history": [list(row) for row in self.history],
        }


def _integrals(values: np.ndarray, weights: np.ndarray, cq: CharQuadruplet) -> tuple[tuple[float, float, float], float | None]:
    family = cq.levy_family
    f = values.ravel()
    w = np.broadcast_to(weights, values.shape).ravel()
    nonzero = f != 0
    f, w = f[nonzero], w[nonzero]
    radius = 1.0 / np.abs(f)

    drift = float(cq.drift)  # type: ignore[arg-type]
    if family is None:
        compensation = np.abs(f * drift)
        jumps = np.zeros_like(f)
        positive = None
    else:
        compensator = family.truncated_mean(1.0)
        compensation = np.abs(f * drift + f * (family.truncated_mean(radius) - compensator))
        jumps = f**2 * family.truncated_second_moment(radius) + family.tail_mass(radius)
        positive = None
        if cq.is_subordinator and np.all(f > 0):
            positive = float(np.sum((f * family.truncated_mean(radius) + family.tail_mass(radius)) * w))

    values_out = (
        float(np.sum(compensation * w)),
        float(np.sum(f**2 * cq.gaussian_var * w)),
        float(np.sum(jumps * w)),
    )
    return values_out, positive


def check_integrability(kernel_samples: ArrayLike, cq: CharQuadruplet, grid: GridSpec,
                        cap: float = DEFAULT_CAP) -> IntegrabilityReport:
    """
    Quadrature of the three integrability integrals of a tabulated kernel.

    Rows of a two-dimensional sample array beyond the grid shape are read as mixing nodes, weighted by the
    basis control measure.

    ### Arguments
    - kernel_samples (ArrayLike): Kernel values on the grid, shape grid.shape or (n_nodes, *grid.shape)
    - cq (CharQuadruplet): The basis integrating the kernel
    - grid (GridSpec): Lattice of the samples
    - cap (float): Values above this are reported as not finite

    ### Returns
    - IntegrabilityReport: Never raises on overflow
    """
    samples = np.asarray(kernel_samples, dtype=float)
    node_weights = cq.control.weight_array()
    if samples.shape == grid.shape:
        samples = samples[np.newaxis]
        node_weights = np.ones(1)
    if samples.shape != (len(node_weights), *grid.shape):
        raise ValueError(f"kernel samples of shape {samples.shape} do not match grid {grid.shape}")

    weights = node_weights.reshape((-1,) + (1,) * grid.dim) * grid.cell_volume
    with np.errstate(all="ignore"):
        values, positive = _integrals(samples, weights, cq)
    finite = all(np.isfinite(value) and value < cap for value in values)
    if positive is not None and not (np.isfinite(positive) and positive < cap):
        finite = False
    return IntegrabilityReport(finite, values, positive)


def check_kernel_integrability(kernel: Kernel, cq: CharQuadruplet, step: float | tuple[float, ...],
                               radius: float, doublings: int = 3, cap: float = DEFAULT_CAP) -> IntegrabilityReport:
    """
    Repeat check_integrability over windows of growing radius.

    ### Arguments
    - kernel (Kernel): Kernel to tabulate, mixed over its own mixing measure
    - cq (CharQuadruplet): The basis
    - step (float | tuple[float, ...]): Lattice step
    - radius (float): First truncation radius
    - doublings (int): Number of radius doublings
    - cap (float): Cap passed to every check

    ### Returns
    - IntegrabilityReport: The last report, not finite when a doubling moved any value by more than 10%
    """
    steps = tuple(np.broadcast_to(np.asarray(step, dtype=float), (kernel.dim,)))
    radii: list[float] = []
    history: list[tuple[float, float, float]] = []
    report = None
    finite = True
    current = float(radius)
    for _ in range(doublings + 1):
        table = kernel.tabulate(kernel.clipped_window(steps, current))
        report = check_integrability(table.values, cq.with_control(kernel.mixing), table.window, cap)
        if history:
            previous = np.asarray(history[-1])
            change = np.abs(np.asarray(report.values) - previous)
            scale = np.maximum(np.abs(previous), np.finfo(float).tiny)
            if np.any((change > DIVERGENCE_RATIO * scale) & (change > 0)):
                finite = False
        finite = finite and report.finite
        radii.append(current)
        history.append(report.values)
        current *= 2.0
    assert report is not None
    return IntegrabilityReport(finite, report.values, report.positive_variant, tuple(radii), tuple(history))
