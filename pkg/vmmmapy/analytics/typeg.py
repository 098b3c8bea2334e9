"""The type G law of X(t): Laplace transform of V and the characteristic function of X"""
from __future__ import annotations

# Built-in
from dataclasses import dataclass, field
from typing import Any

# Third-Party
import numpy as np
from numpy.typing import ArrayLike

# This project
from vmmmapy.kernels.kernel import convolve_tables
from vmmmapy.levy.basis import LevyFamily
from vmmmapy.simulate.model import ConstantVolatility, VmmmaModel

__all__: tuple[str, ...] = ("TypeGLaw", "law_of", "laplace_V", "char_X")


@dataclass(frozen=True, eq=False)
class TypeGLaw:
    """
    Law of V(t) = sum_y sum_u k(y, t - u) L_y(u) for a subordinator basis, or of a deterministic V.

    Lambda_V(theta) = sum_y p_y cellvol sum_z kappa(-theta k(y, z)), the lattice form of the Laplace exponent.

    ### Arguments
    - k_values (np.ndarray): The convolution kernel k = g~ * h, shape (n_y, ...)
    - weights (np.ndarray): p_y cellvol per mixing node of h
    - family (LevyFamily | None): Jump law of the volatility basis, None when V is deterministic
    - variance (float): The deterministic V when family is None
    - drift (float): Residual drift of the volatility basis

    ### Returns
    - None
    """

    k_values: np.ndarray
    weights: np.ndarray
    family: LevyFamily | None = None
    variance: float = 0.0
    drift: float = 0.0
    _rows: list[np.ndarray] = field(init=False, repr=False, default_factory=list)

    def __post_init__(self) -> None:
        k_values = np.maximum(np.asarray(self.k_values, dtype=float), 0.0)
        weights = np.asarray(self.weights, dtype=float)
        if k_values.shape[:1] != weights.shape:
            raise ValueError(f"k of shape {k_values.shape} does not match {weights.shape[0]} weights")
        flat = k_values.reshape(len(weights), -1)
        active = flat > 0
        object.__setattr__(self, "k_values", k_values)
        object.__setattr__(self, "weights", weights)
        # Zero entries add nothing to any sum below
        object.__setattr__(self, "_rows", [row[mask] for row, mask in zip(flat, active)])

    @classmethod
    def deterministic(cls, variance: float) -> TypeGLaw:
        return cls(np.zeros((1, 1)), np.ones(1), None, float(variance))

    @property
    def is_deterministic(self) -> bool:
        return self.family is None

    def laplace(self, theta: ArrayLike) -> np.ndarray | float:
        """Lambda_V(theta) = log E exp(-theta V) for theta >= 0"""
        theta_array = np.asarray(theta, dtype=float)
        if np.any(theta_array < 0):
            raise ValueError("the Laplace exponent is evaluated at theta >= 0")
        if self.family is None:
            value = -theta_array * self.variance
        else:
            flat = theta_array.ravel()
            value = np.zeros(flat.shape)
            for weight, row in zip(self.weights, self._rows):
                arguments = -np.multiply.outer(flat, row)
                value += weight * (self.family.cumulant(arguments).sum(axis=1) - self.drift * flat * row.sum())
            value = value.reshape(theta_array.shape)
        return float(value) if np.ndim(value) == 0 else value

    def derivative(self, theta: ArrayLike, order: int) -> np.ndarray | float:
        """d^n/dtheta^n Lambda_V(theta) = sum_y w_y sum_z (-k)^n kappa^{(n)}(-theta k)"""
        theta_array = np.asarray(theta, dtype=float)
        if self.family is None:
            value = np.full(theta_array.shape, -self.variance if order == 1 else 0.0)
        else:
            flat = theta_array.ravel()
            value = np.zeros(flat.shape)
            for weight, row in zip(self.weights, self._rows):
                arguments = -np.multiply.outer(flat, row)
                value += weight * ((-row) ** order * self.family.derivative(arguments, order)).sum(axis=1)
                if order == 1:
                    value -= weight * self.drift * row.sum()
            value = value.reshape(theta_array.shape)
        return float(value) if np.ndim(value) == 0 else value

    def cumulant(self, order: int) -> float:
        """n-th cumulant of V"""
        return float((-1) ** order * self.derivative(0.0, order))

    def mean(self) -> float:
        """E V(t)"""
        return self.cumulant(1)

    def char(self, theta: ArrayLike) -> np.ndarray | float:
        """E exp(i theta X(t)) = exp(Lambda_V(theta^2 / 2))"""
        theta_array = np.asarray(theta, dtype=float)
        value = np.exp(self.laplace(theta_array**2 / 2.0))
        return float(value) if np.ndim(value) == 0 else value

    def u_tail(self, x: ArrayLike) -> np.ndarray | float:
        """U((x, inf)) = sum_y w_y sum_z nu((x / k, inf)), the Lévy measure of V"""
        points = np.asarray(x, dtype=float)
        if self.family is None:
            return np.zeros(points.shape) if points.ndim else 0.0
        flat = points.ravel()
        value = np.zeros(flat.shape)
        for weight, row in zip(self.weights, self._rows):
            value += weight * self.family.tail_mass(np.divide.outer(flat, row)).sum(axis=1)
        value = value.reshape(points.shape)
        return float(value) if value.ndim == 0 else value

    def to_dict(self) -> dict[str, Any]:
        return {
            "deterministic": self.is_deterministic,
            "family": None if self.family is None else self.family.to_dict(),
            "mean_V": self.mean(),
            "k_nodes": int(sum(len(row) for row in self._rows)),
        }


def law_of(model: VmmmaModel) -> TypeGLaw:
    """
    The type G law of X(t) under model, cached on the model.

    ### Arguments
    - model (VmmmaModel): The model

    ### Returns
    - TypeGLaw: Shares the kernel tables used for simulation
    """
    if "law" in model.cache:
        return model.cache["law"]
    g_table = model.g_table()
    tilde = g_table.g_tilde()
    if isinstance(model.volatility, ConstantVolatility):
        law = TypeGLaw.deterministic(model.volatility.value * float(tilde.sum()) * model.cell_volume)
    else:
        h_table = model.h_table()
        assert h_table is not None
        rows = [convolve_tables(tilde, g_table.window, values, h_table.window)[0] for values in h_table.values]
        basis = model.volatility.basis
        law = TypeGLaw(np.stack(rows), h_table.weights * model.cell_volume, basis.levy_family, drift=basis.residual_drift)
    model.cache["law"] = law
    return law


def laplace_V(model: VmmmaModel, theta: ArrayLike) -> np.ndarray | float:  # pylint: disable=invalid-name
    """Lambda_V(theta), with Lambda_V(0) = 0 and Lambda_V <= 0"""
    return law_of(model).laplace(theta)


def char_X(model: VmmmaModel, theta: ArrayLike) -> np.ndarray | float:  # pylint: disable=invalid-name
    """exp(Lambda_V(theta^2 / 2)), real and even in theta"""
    return law_of(model).char(theta)
