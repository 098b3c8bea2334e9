"""Volatility models and the VMMMA model tabulated on a simulation lattice"""
from __future__ import annotations

# Built-in
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Sequence

# Third-Party
import numpy as np

# This project
from vmmmapy.errors import DomainError, GridMismatchError
from vmmmapy.kernels.grid import GridSpec
from vmmmapy.kernels.kernel import DEFAULT_TOLERANCE, Kernel, KernelTable
from vmmmapy.levy.basis import CharQuadruplet

__all__: tuple[str, ...] = ("ConstantVolatility", "VolatilityModel", "VmmmaModel")


@dataclass(frozen=True)
class ConstantVolatility:
    """sigma^2 fixed at value everywhere"""

    value: float = 1.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"a constant volatility must be nonnegative, got {self.value!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class VolatilityModel:
    """
    sigma^2(s) = int h(y, s - u) L(dy, du) for a subordinator basis L with control p(dy) du.

    The mixing measure p of the basis is the one carried by kernel_h.

    ### Arguments
    - kernel_h (Kernel): Nonnegative kernel mixed over p
    - basis (CharQuadruplet): Subordinator basis

    ### Returns
    - None
    """

    kernel_h: Kernel
    basis: CharQuadruplet

    def __post_init__(self) -> None:
        if not self.basis.is_subordinator:
            raise ValueError("the volatility basis must be a subordinator without Gaussian part")
        if self.basis.control != self.kernel_h.mixing:
            object.__setattr__(self, "basis", self.basis.with_control(self.kernel_h.mixing))

    @property
    def mixing(self) -> Any:
        return self.kernel_h.mixing

    def table(self, step: Sequence[float], tol: float = DEFAULT_TOLERANCE, max_radius: float | None = None) -> KernelTable:
        table = self.kernel_h.table(step, tol, max_radius)
        if np.any(table.values < 0):
            raise DomainError("the volatility kernel h must be nonnegative")
        return table

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "levy", "kernel_h": self.kernel_h.to_dict(), "basis": self.basis.to_dict()}


@dataclass(frozen=True, eq=False)
class VmmmaModel:
    """
    The field X(t) = int g(x, t - s) sigma(s) W(dx, ds) on a lattice of spacing step.

    Kernel tables are computed once and cached, so simulation and analytics share one discretisation.

    ### Arguments
    - kernel_g (Kernel): Kernel of the field
    - volatility (VolatilityModel | ConstantVolatility): Law of sigma^2
    - step (tuple[float, ...]): Lattice spacing
    - tol (float): Relative tail mass of every kernel left outside its window
    - max_radius (float | None): Window cap for unbounded supports

    ### Returns
    - None
    """

    kernel_g: Kernel
    volatility: VolatilityModel | ConstantVolatility
    step: tuple[float, ...]
    tol: float = DEFAULT_TOLERANCE
    max_radius: float | None = None
    cache: dict[str, Any] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        step = tuple(float(value) for value in np.atleast_1d(self.step))
        object.__setattr__(self, "step", step)
        if len(step) != self.kernel_g.dim:
            raise GridMismatchError(f"step {step} does not match a kernel of dimension {self.kernel_g.dim}")
        if isinstance(self.volatility, VolatilityModel) and self.volatility.kernel_h.dim != self.kernel_g.dim:
            raise GridMismatchError("kernels g and h must have the same dimension")
        if not 0 < self.tol < 1:
            raise ValueError("the truncation tolerance must lie in (0, 1)")

    @property
    def dim(self) -> int:
        return self.kernel_g.dim

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.step))

    @property
    def is_constant(self) -> bool:
        return isinstance(self.volatility, ConstantVolatility)

    def g_table(self) -> KernelTable:
        if "g" not in self.cache:
            self.cache["g"] = self.kernel_g.table(self.step, self.tol, self.max_radius)
        return self.cache["g"]

    def h_table(self) -> KernelTable | None:
        if not isinstance(self.volatility, VolatilityModel):
            return None
        if "h" not in self.cache:
            self.cache["h"] = self.volatility.table(self.step, self.tol, self.max_radius)
        return self.cache["h"]

    def volatility_grid(self, target: GridSpec) -> GridSpec:
        """Lattice where sigma^2 is needed to build X on target"""
        return target.dilate(self.g_table().window)

    def basis_grid(self, target: GridSpec) -> GridSpec:
        """Lattice of basis cells driving sigma^2 on volatility_grid(target)"""
        vol_grid = self.volatility_grid(target)
        table = self.h_table()
        return vol_grid if table is None else vol_grid.dilate(table.window)

    def mean_volatility(self) -> float:
        """E sigma^2 = kappa_1 sum_y p_y sum_u h(y, u) cellvol"""
        if isinstance(self.volatility, ConstantVolatility):
            return self.volatility.value
        table = self.h_table()
        assert table is not None
        mass = float(table.mixed().sum()) * self.cell_volume
        return self.volatility.basis.moment_cumulant(1) * mass

    def to_dict(self) -> dict[str, Any]:
        return {
            "kernel_g": self.kernel_g.to_dict(),
            "volatility": self.volatility.to_dict(),
            "step": list(self.step),
            "tol": self.tol,
            "max_radius": self.max_radius,
        }

    def digest(self) -> str:
        """sha256 of the canonical JSON description"""
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True, default=str).encode()).hexdigest()
