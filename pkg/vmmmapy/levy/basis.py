"""Homogeneous factorisable Lévy bases: seed laws, cumulants and cell increments"""
from __future__ import annotations

# Built-in
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, fields
from typing import Any, ClassVar

# Third-Party
import numpy as np
from numpy.typing import ArrayLike
from scipy import special

# This project
from vmmmapy.errors import DomainError
from .mixing import MixingMeasure

__all__: tuple[str, ...] = (
    "LevyFamily",
    "GammaSubordinator",
    "InverseGaussianSubordinator",
    "CompoundPoisson",
    "CharQuadruplet",
    "seed_cumulant",
    "sample_cell_increment",
    "LEVY_FAMILIES",
)

DRIFT_TOLERANCE = 1e-12


class LevyFamily(ABC):
    """
    A parametric Lévy measure on (0, inf) with an exact cell-increment sampler.

    Subclasses give the seed cumulant kappa(theta) = int (e^{theta w} - 1) nu(dw) and its derivatives in
    closed form, together with the truncated moments used by the integrability checks.
    """

    name: ClassVar[str]

    def __post_init__(self) -> None:
        for item in fields(self):  # type: ignore[arg-type]
            value = getattr(self, item.name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{type(self).__name__}.{item.name} must be strictly positive, got {value!r}")

    @property
    @abstractmethod
    def domain_bound(self) -> float:
        """Supremum of the theta for which the cumulant is finite"""

    @property
    def domain_closed(self) -> bool:
        """Whether the cumulant is still finite at the domain bound"""
        return False

    @abstractmethod
    def _cumulant(self, theta: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _derivative(self, theta: np.ndarray, order: int) -> np.ndarray:
        ...

    @abstractmethod
    def truncated_mean(self, radius: ArrayLike) -> np.ndarray:
        """int_{0 < w <= r} w nu(dw)"""

    @abstractmethod
    def truncated_second_moment(self, radius: ArrayLike) -> np.ndarray:
        """int_{0 < w <= r} w^2 nu(dw)"""

    @abstractmethod
    def tail_mass(self, radius: ArrayLike) -> np.ndarray:
        """nu((r, inf))"""

    @abstractmethod
    def sample(self, measure: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Independent increments over cells with the given control masses"""

    def check_domain(self, theta: ArrayLike) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        bound = self.domain_bound
        outside = theta > bound if self.domain_closed else theta >= bound
        if np.any(outside) or np.any(np.isnan(theta)):
            raise DomainError(f"theta must stay {'<=' if self.domain_closed else '<'} {bound} for {self}")
        return theta

    def cumulant(self, theta: ArrayLike) -> np.ndarray:
        return self._cumulant(self.check_domain(theta))

    def derivative(self, theta: ArrayLike, order: int) -> np.ndarray:
        """The order-th derivative of the seed cumulant at theta"""
        if order < 1:
            raise ValueError("derivative order starts at 1")
        theta = self.check_domain(theta)
        if self.domain_closed and np.any(theta == self.domain_bound):
            raise DomainError(f"cumulant derivatives are not finite at theta = {self.domain_bound}")
        return self._derivative(theta, order)

    def moment_cumulant(self, order: int) -> float:
        """kappa^{(n)}(0), the n-th cumulant of the seed"""
        return float(self.derivative(0.0, order))

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.name, "params": {item.name: getattr(self, item.name) for item in fields(self)}}  # type: ignore[arg-type]


@dataclass(frozen=True)
class GammaSubordinator(LevyFamily):
    """nu(dw) = shape e^{-rate w} / w dw"""

    name: ClassVar[str] = "gamma"
    shape: float
    rate: float

    @property
    def domain_bound(self) -> float:
        return self.rate

    def _cumulant(self, theta: np.ndarray) -> np.ndarray:
        return -self.shape * np.log1p(-theta / self.rate)

    def _derivative(self, theta: np.ndarray, order: int) -> np.ndarray:
        return self.shape * math.factorial(order - 1) * (self.rate - theta) ** (-order)

    def truncated_mean(self, radius: ArrayLike) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        return -self.shape * np.expm1(-self.rate * radius) / self.rate

    def truncated_second_moment(self, radius: ArrayLike) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        return self.shape / self.rate**2 * special.gammainc(2.0, self.rate * radius)

    def tail_mass(self, radius: ArrayLike) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        return self.shape * special.exp1(self.rate * radius)

    def sample(self, measure: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return rng.gamma(self.shape * measure, 1.0 / self.rate)


@dataclass(frozen=True)
class InverseGaussianSubordinator(LevyFamily):
    """nu(dw) = delta (2 pi)^{-1/2} w^{-3/2} e^{-gamma^2 w / 2} dw"""

    name: ClassVar[str] = "inverse_gaussian"
    delta: float
    gamma: float

    @property
    def domain_bound(self) -> float:
        return self.gamma**2 / 2.0

    @property
    def domain_closed(self) -> bool:
        return True

    def _cumulant(self, theta: np.ndarray) -> np.ndarray:
        return self.delta * (self.gamma - np.sqrt(self.gamma**2 - 2.0 * theta))

    def _derivative(self, theta: np.ndarray, order: int) -> np.ndarray:
        double_factorial = float(special.factorial2(2 * order - 3)) if order > 1 else 1.0
        return self.delta * double_factorial * (self.gamma**2 - 2.0 * theta) ** (0.5 - order)

    def truncated_mean(self, radius: ArrayLike) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        return self.delta / self.gamma * special.erf(self.gamma * np.sqrt(radius / 2.0))

    def truncated_second_moment(self, radius: ArrayLike) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        a = self.gamma**2 / 2.0
        return self.delta / math.sqrt(2.0 * math.pi) * special.gamma(1.5) / a**1.5 * special.gammainc(1.5, a * radius)

    def tail_mass(self, radius: ArrayLike) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        x = self.gamma**2 / 2.0 * radius
        with np.errstate(divide="ignore"):
            upper = 2.0 * np.exp(-x) / np.sqrt(x) - 2.0 * math.sqrt(math.pi) * special.erfc(np.sqrt(x))
        return self.delta / math.sqrt(2.0 * math.pi) * self.gamma / math.sqrt(2.0) * upper

    def sample(self, measure: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        out = np.zeros_like(measure, dtype=float)
        positive = measure > 0
        scaled = self.delta * measure[positive]
        # numpy's wald takes the mean and the shape parameter
        out[positive] = rng.wald(scaled / self.gamma, scaled**2)
        return out


@dataclass(frozen=True)
class CompoundPoisson(LevyFamily):
    """nu = intensity * delta_{jump_size}"""

    name: ClassVar[str] = "compound_poisson"
    intensity: float
    jump_size: float

    @property
    def domain_bound(self) -> float:
        return math.inf

    def _cumulant(self, theta: np.ndarray) -> np.ndarray:
        return self.intensity * np.expm1(theta * self.jump_size)

    def _derivative(self, theta: np.ndarray, order: int) -> np.ndarray:
        return self.intensity * self.jump_size**order * np.exp(theta * self.jump_size)

    def truncated_mean(self, radius: ArrayLike) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        return np.where(self.jump_size <= radius, self.intensity * self.jump_size, 0.0)

    def truncated_second_moment(self, radius: ArrayLike) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        return np.where(self.jump_size <= radius, self.intensity * self.jump_size**2, 0.0)

    def tail_mass(self, radius: ArrayLike) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        return np.where(self.jump_size > radius, self.intensity, 0.0)

    def sample(self, measure: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.jump_size * rng.poisson(self.intensity * measure)


LEVY_FAMILIES: dict[str, type[LevyFamily]] = {
    family.name: family for family in (GammaSubordinator, InverseGaussianSubordinator, CompoundPoisson)
}


@dataclass(frozen=True)
class CharQuadruplet:
    """
    Characteristic quadruplet (a, b, nu, c) of a homogeneous Lévy basis with control c(dx ds) = p(dx) ds.

    A basis with a jump family and no Gaussian part is a subordinator; its drift is pinned to
    int_{|w|<=1} w nu(dw) so that the drift left after compensation is zero. Leaving drift as None fills it in.

    ### Arguments
    - drift (float | None): The a of the quadruplet
    - gaussian_var (float): The b of the quadruplet
    - levy_family (LevyFamily | None): Jump part, None for a Gaussian basis
    - control (MixingMeasure): The p(dx) factor of the control measure

    ### Returns
    - None
    """

    drift: float | None = None
    gaussian_var: float = 0.0
    levy_family: LevyFamily | None = None
    control: MixingMeasure = field(default_factory=MixingMeasure.dirac)

    def __post_init__(self) -> None:
        if not (np.isfinite(self.gaussian_var) and self.gaussian_var >= 0):
            raise ValueError(f"gaussian_var must be nonnegative, got {self.gaussian_var!r}")
        compensator = 0.0 if self.levy_family is None else float(self.levy_family.truncated_mean(1.0))
        if self.drift is None:
            object.__setattr__(self, "drift", compensator)
        elif self.is_subordinator and abs(self.drift - compensator) > DRIFT_TOLERANCE * max(1.0, abs(compensator)):
            raise ValueError(
                f"a subordinator basis needs drift {compensator!r} (zero drift after compensation), got {self.drift!r}"
            )

    @classmethod
    def gaussian(cls, variance: float, drift: float = 0.0, control: MixingMeasure | None = None) -> CharQuadruplet:
        return cls(drift, variance, None, control or MixingMeasure.dirac())

    @classmethod
    def subordinator(cls, family: LevyFamily, control: MixingMeasure | None = None) -> CharQuadruplet:
        return cls(None, 0.0, family, control or MixingMeasure.dirac())

    @property
    def is_subordinator(self) -> bool:
        return self.levy_family is not None and self.gaussian_var == 0.0

    @property
    def residual_drift(self) -> float:
        """a - int_{|w|<=1} w nu(dw), the deterministic rate left after compensation"""
        compensator = 0.0 if self.levy_family is None else float(self.levy_family.truncated_mean(1.0))
        return float(self.drift) - compensator  # type: ignore[arg-type]

    def moment_cumulant(self, order: int) -> float:
        """n-th cumulant of the seed, including the Gaussian and drift parts"""
        jumps = 0.0 if self.levy_family is None else self.levy_family.moment_cumulant(order)
        if order == 1:
            return self.residual_drift + jumps
        if order == 2:
            return self.gaussian_var + jumps
        return jumps

    def with_control(self, control: MixingMeasure) -> CharQuadruplet:
        return CharQuadruplet(self.drift, self.gaussian_var, self.levy_family, control)

    def to_dict(self) -> dict[str, Any]:
        if self.levy_family is None:
            return {"family": "gaussian", "params": {"variance": self.gaussian_var, "drift": self.drift}}
        return self.levy_family.to_dict()


def seed_cumulant(cq: CharQuadruplet, theta: ArrayLike) -> np.ndarray | float:
    """
    The jump part kappa(theta) = int (e^{theta w} - 1) nu(dw) of the seed cumulant.

    ### Arguments
    - cq (CharQuadruplet): The basis
    - theta (ArrayLike): Argument(s) inside the family's domain of finiteness

    ### Returns
    - float | np.ndarray: kappa(theta), zero for a Gaussian basis
    """
    theta_array = np.asarray(theta, dtype=float)
    if cq.levy_family is None:
        value = np.zeros_like(theta_array)
    else:
        value = cq.levy_family.cumulant(theta_array)
    return float(value) if value.ndim == 0 else value


def sample_cell_increment(cq: CharQuadruplet, cell_measure: ArrayLike, rng: np.random.Generator,
                          size: tuple[int, ...] | None = None) -> np.ndarray | float:
    """
    Draw basis increments L(cell) over cells with the given control masses.

    ### Arguments
    - cq (CharQuadruplet): The basis
    - cell_measure (ArrayLike): Nonnegative control mass of every cell
    - rng (np.random.Generator): The stream to consume
    - size (tuple[int, ...] | None): Broadcast a scalar mass to this many cells

    ### Returns
    - float | np.ndarray: Independent increments, one per cell
    """
    measure = np.asarray(cell_measure, dtype=float)
    if size is not None:
        measure = np.broadcast_to(measure, size)
    if np.any(measure < 0) or not np.all(np.isfinite(measure)):
        raise ValueError("cell measures must be finite and nonnegative")

    value = np.zeros(measure.shape)
    if cq.gaussian_var > 0:
        value += np.sqrt(cq.gaussian_var * measure) * rng.standard_normal(measure.shape)
    if cq.levy_family is not None:
        value += cq.levy_family.sample(np.array(measure), rng)
    if cq.residual_drift != 0.0:
        value += cq.residual_drift * measure
    return float(value) if value.ndim == 0 else value
