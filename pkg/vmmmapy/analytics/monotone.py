"""Check that Psi' = -Lambda_V' is completely monotone"""
from __future__ import annotations

# Built-in
from dataclasses import dataclass
from typing import Any, Callable

# Third-Party
import numpy as np
from numpy.typing import ArrayLike

# This project
from vmmmapy.simulate.model import VmmmaModel
from .typeg import law_of

__all__: tuple[str, ...] = ("OrderCheck", "MonotonicityReport", "check_sign_pattern", "check_complete_monotonicity")

NOISE_FLOOR = 1e-8


@dataclass(frozen=True)
class OrderCheck:
    order: int
    worst_margin: float
    noise_floor: float

    @property
    def passed(self) -> bool:
        return self.worst_margin > -self.noise_floor

    def to_dict(self) -> dict[str, Any]:
        return {
            "order": self.order,
            "worst_margin": self.worst_margin,
            "noise_floor": self.noise_floor,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class MonotonicityReport:
    """
    Sign pattern of (-1)^n d^n/dzeta^n Psi'(zeta) on a grid, one entry per order n.

    ### Arguments
    - orders (tuple[OrderCheck, ...]): Checks for n = 0..max_order
    - psi_at_zero (float): Psi(0), which must vanish

    ### Returns
    - None
    """

    orders: tuple[OrderCheck, ...]
    psi_at_zero: float

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.orders)

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "psi_at_zero": self.psi_at_zero,
            "orders": [check.to_dict() for check in self.orders],
        }


def check_sign_pattern(derivative: Callable[[np.ndarray, int], np.ndarray], theta_grid: ArrayLike,
                       max_order: int = 4) -> tuple[OrderCheck, ...]:
    """
    Worst margin of (-1)^n f^{(n)} on a grid for n = 0..max_order.

    ### Arguments
    - derivative (Callable): derivative(zeta, n) returns the n-th derivative of f at zeta
    - theta_grid (ArrayLike): Strictly positive uniform grid of at least two points
    - max_order (int): Highest order checked

    ### Returns
    - tuple[OrderCheck, ...]: One check per order, each with the fixed NOISE_FLOOR
    """
    grid = np.asarray(theta_grid, dtype=float).ravel()
    if grid.size < 2:
        raise ValueError("the monotonicity grid needs at least two points")
    spacing = np.diff(grid)
    if np.any(grid <= 0) or np.any(spacing <= 0) or not np.allclose(spacing, spacing[0], rtol=1e-8):
        raise ValueError("the monotonicity grid must be strictly positive, increasing and uniform")
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    checks = []
    for order in range(max_order + 1):
        values = (-1) ** order * np.asarray(derivative(grid, order), dtype=float)
        checks.append(OrderCheck(order, float(values.min()), NOISE_FLOOR))
    return tuple(checks)


def check_complete_monotonicity(model: VmmmaModel, theta_grid: ArrayLike, max_order: int = 4) -> MonotonicityReport:
    """
    Verify (-1)^n Psi^{(n+1)} >= 0 for n = 0..max_order from the closed-form derivatives of Lambda_V.

    ### Arguments
    - model (VmmmaModel): The model
    - theta_grid (ArrayLike): Strictly positive uniform grid of at least two points
    - max_order (int): Highest derivative order of Psi' to check

    ### Returns
    - MonotonicityReport: Worst margin per order, each required to stay above -NOISE_FLOOR
    """
    law = law_of(model)

    def psi_prime(zeta: np.ndarray, order: int) -> np.ndarray:
        return -np.asarray(law.derivative(zeta, order + 1), dtype=float)

    return MonotonicityReport(check_sign_pattern(psi_prime, theta_grid, max_order), float(-law.laplace(0.0)))
