"""Generalised Lamperti transform between stationary and multi-self-similar fields"""
from __future__ import annotations

# Built-in
import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

# Third-Party
import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate

# This project
from vmmmapy.analytics.typeg import TypeGLaw
from vmmmapy.errors import DomainError, GridMismatchError
from vmmmapy.simulate.field import FieldSample
from vmmmapy.simulate.montecarlo import Estimate, jackknife

__all__: tuple[str, ...] = (
    "MssIndex",
    "to_mss",
    "from_mss",
    "mss_covariance",
    "mss_cf",
    "stat_incr_covariance",
    "rho_translation_invariant",
    "rho_min_eigenvalue",
    "spectral_from_rho",
    "scaling_ratio",
)


@dataclass(frozen=True)
class MssIndex:
    """
    The index H = (H_1, ..., H_d) of a multi-self-similar field.

    ### Arguments
    - hurst (tuple[float, ...]): Strictly positive entries, one per axis

    ### Returns
    - None
    """

    hurst: tuple[float, ...]

    def __post_init__(self) -> None:
        hurst = tuple(float(value) for value in np.atleast_1d(self.hurst))
        if not hurst or any(not (math.isfinite(value) and value > 0) for value in hurst):
            raise ValueError(f"every H_j must be strictly positive, got {hurst!r}")
        object.__setattr__(self, "hurst", hurst)

    @classmethod
    def of(cls, hurst: MssIndex | Sequence[float] | float) -> MssIndex:
        return hurst if isinstance(hurst, MssIndex) else cls(tuple(np.atleast_1d(hurst)))

    @property
    def dim(self) -> int:
        return len(self.hurst)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.hurst)

    def require_spectral(self) -> float:
        """The single H of a d=1 index in (0, 1)"""
        if self.dim != 1 or not 0 < self.hurst[0] < 1:
            raise DomainError(f"a spectral density needs d = 1 and 0 < H < 1, got {self.hurst}")
        return self.hurst[0]

    def to_dict(self) -> dict[str, Any]:
        return {"hurst": list(self.hurst)}


def _check_dim(index: MssIndex, dim: int) -> None:
    if index.dim != dim:
        raise GridMismatchError(f"H of dimension {index.dim} for a field of dimension {dim}")


def _weights(sample: FieldSample, index: MssIndex) -> np.ndarray:
    """exp(H^T u) on the lattice coordinates u"""
    return np.exp(sample.grid.coordinates() @ index.array)


def to_mss(sample: FieldSample, hurst: MssIndex | Sequence[float] | float) -> FieldSample:
    """
    Y(t) = prod_j t_j^{H_j} X(log t) on the exponential image of the lattice of X.

    ### Arguments
    - sample (FieldSample): X on a linear lattice of log coordinates
    - hurst (MssIndex | Sequence[float] | float): The index H

    ### Returns
    - FieldSample: Y, kind "mss", with H recorded in its provenance
    """
    index = MssIndex.of(hurst)
    _check_dim(index, sample.grid.dim)
    if sample.grid.scale != "linear":
        raise GridMismatchError("the Lamperti transform starts from a lattice of log coordinates")
    provenance = {**sample.provenance, "hurst": list(index.hurst)}
    return FieldSample(sample.grid.exponentiated(), _weights(sample, index) * sample.values, "mss", provenance)


def from_mss(sample: FieldSample, hurst: MssIndex | Sequence[float] | float) -> FieldSample:
    """X(u) = exp(-H^T u) Y(e^u), the inverse of to_mss"""
    index = MssIndex.of(hurst)
    _check_dim(index, sample.grid.dim)
    if sample.grid.scale != "exponential":
        raise GridMismatchError("the inverse Lamperti transform needs a field on an exponential lattice")
    provenance = {key: value for key, value in sample.provenance.items() if key != "hurst"}
    return FieldSample(sample.grid.logarithmic(), sample.values / _weights(sample, index), "field", provenance)


def _positive(point: ArrayLike, dim: int, name: str) -> np.ndarray:
    values = np.atleast_1d(np.asarray(point, dtype=float))
    if values.shape != (dim,):
        raise GridMismatchError(f"{name} = {values} does not have dimension {dim}")
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise DomainError(f"{name} must lie in the open positive orthant, got {values}")
    return values


def mss_covariance(covariance: Callable[[np.ndarray], float], hurst: MssIndex | Sequence[float] | float,
                   t: ArrayLike, t_star: ArrayLike) -> float:
    """
    Cov(Y(t), Y(t*)) = exp(H^T (log t + log t*)) R_X(log t - log t*).

    ### Arguments
    - covariance (Callable): R_X evaluated at a lag vector
    - hurst (MssIndex | Sequence[float] | float): The index H
    - t (ArrayLike): First point, strictly positive
    - t_star (ArrayLike): Second point, strictly positive

    ### Returns
    - float: The covariance
    """
    index = MssIndex.of(hurst)
    first, second = _positive(t, index.dim, "t"), _positive(t_star, index.dim, "t*")
    log_first, log_second = np.log(first), np.log(second)
    return float(np.exp(index.array @ (log_first + log_second)) * covariance(log_first - log_second))


def mss_cf(law: TypeGLaw, hurst: MssIndex | Sequence[float] | float, t: ArrayLike, theta: ArrayLike) -> np.ndarray | float:
    """E exp(i theta Y(t)) = char_X(theta prod_j t_j^{H_j})"""
    index = MssIndex.of(hurst)
    point = _positive(t, index.dim, "t")
    scale = float(np.prod(point**index.array))
    return law.char(np.asarray(theta, dtype=float) * scale)


def stat_incr_covariance(hurst: MssIndex | Sequence[float] | float, var_x0: float, t: ArrayLike, s: ArrayLike) -> float:
    """
    Covariance of an H-mss field with second-order translation-invariant increments.

    1/2 [prod t^{2H} + prod s^{2H} - prod |t - s|^{2H}] Var X(0), with absolute differences per axis.

    ### Arguments
    - hurst (MssIndex | Sequence[float] | float): The index H
    - var_x0 (float): Var X(0)
    - t (ArrayLike): First point
    - s (ArrayLike): Second point

    ### Returns
    - float: The covariance
    """
    index = MssIndex.of(hurst)
    first, second = _positive(t, index.dim, "t"), _positive(s, index.dim, "s")
    power = 2.0 * index.array
    increments = float(np.prod(np.abs(first - second) ** power))
    return 0.5 * (float(np.prod(first**power)) + float(np.prod(second**power)) - increments) * var_x0


def rho_translation_invariant(hurst: MssIndex | Sequence[float] | float, h: ArrayLike) -> np.ndarray | float:
    """
    rho(h) = cosh(h^T H) - 2^{2 sum H - 1} prod_k sinh^{2 H_k}(|h_k| / 2).

    Evaluated as 1/2 e^{-c} + 1/2 e^{a} (1 - P) - 1/2 (e^{a} - e^{c}) with c = |h^T H|, a = sum |h_k| H_k and
    P = prod (1 - e^{-|h_k|})^{2 H_k}, so that no large exponentials cancel.

    ### Arguments
    - hurst (MssIndex | Sequence[float] | float): The index H
    - h (ArrayLike): Lag vectors, shape (..., d), or plain lags when d = 1

    ### Returns
    - np.ndarray | float: The correlation, 1 at h = 0
    """
    index = MssIndex.of(hurst)
    lags = np.asarray(h, dtype=float)
    if index.dim == 1 and (lags.ndim == 0 or lags.shape[-1] != 1):
        lags = lags[..., np.newaxis]
    if lags.shape[-1] != index.dim:
        raise GridMismatchError(f"lags of dimension {lags.shape[-1]} for H of dimension {index.dim}")
    absolute = np.abs(lags)
    c = np.abs(lags @ index.array)
    a = absolute @ index.array
    with np.errstate(divide="ignore"):
        log_p = np.sum(2.0 * index.array * np.log1p(-np.exp(-absolute)), axis=-1)
        increments = np.exp(a + np.log(-np.expm1(log_p)))
        mismatch = np.exp(a + np.log(-np.expm1(np.minimum(c - a, 0.0))))
    value = 0.5 * np.exp(-c) + 0.5 * increments - 0.5 * mismatch
    return float(value) if np.ndim(value) == 0 else value


def rho_min_eigenvalue(hurst: MssIndex | Sequence[float] | float, points: ArrayLike) -> float:
    """
    Smallest eigenvalue of the matrix rho(t_i - t_j) over a set of points.

    A negative value shows that rho is not positive definite for this H, so no H-mss field with
    translation-invariant increments exists behind it.

    ### Arguments
    - hurst (MssIndex | Sequence[float] | float): The index H
    - points (ArrayLike): Points of shape (n, d)

    ### Returns
    - float: The smallest eigenvalue
    """
    index = MssIndex.of(hurst)
    coordinates = np.asarray(points, dtype=float).reshape(-1, index.dim)
    lags = coordinates[:, np.newaxis, :] - coordinates[np.newaxis, :, :]
    gram = np.asarray(rho_translation_invariant(index, lags), dtype=float)
    return float(np.linalg.eigvalsh(0.5 * (gram + gram.T)).min())


def spectral_from_rho(hurst: MssIndex | Sequence[float] | float, w: ArrayLike) -> np.ndarray | float:
    """
    (1 / pi) int_0^inf rho(h) cos(w h) dh by quadrature, for d = 1 and 0 < H < 1.

    ### Arguments
    - hurst (MssIndex | Sequence[float] | float): The index H
    - w (ArrayLike): Frequencies

    ### Returns
    - np.ndarray | float: The spectral density of rho, the shape of w
    """
    index = MssIndex.of(hurst)
    index.require_spectral()
    frequencies = np.asarray(w, dtype=float)

    def rho(lag: float) -> float:
        return float(rho_translation_invariant(index, lag))

    values = []
    for frequency in np.abs(frequencies.ravel()):
        if frequency == 0.0:
            integral, _ = integrate.quad(rho, 0.0, np.inf, limit=500)
        else:
            integral, _ = integrate.quad(rho, 0.0, np.inf, weight="cos", wvar=frequency, limlst=200)
        values.append(integral / np.pi)
    result = np.asarray(values).reshape(frequencies.shape)
    return float(result) if result.ndim == 0 else result


def scaling_ratio(samples: Sequence[FieldSample], t: ArrayLike, a: ArrayLike) -> Estimate:
    """
    Var Y(a t) / Var Y(t) across independent mss samples, with a jackknife standard error.

    ### Arguments
    - samples (Sequence[FieldSample]): Independent replications of Y on one exponential lattice
    - t (ArrayLike): A lattice point in physical coordinates
    - a (ArrayLike): Componentwise scale, a t must also be on the lattice

    ### Returns
    - Estimate: The ratio, to compare with prod a_j^{2 H_j}
    """
    if len(samples) < 2:
        raise ValueError("the scaling ratio needs at least two samples")
    dim = samples[0].grid.dim
    point = _positive(t, dim, "t")
    scaled = point * np.broadcast_to(np.asarray(a, dtype=float), (dim,))
    log_point, log_scaled = np.log(point), np.log(scaled)
    rows = []
    for sample in samples:
        if sample.grid.scale != "exponential":
            raise GridMismatchError("scaling ratios are taken on exponential lattices")
        far, near = sample.at(log_scaled), sample.at(log_point)
        rows.append([far**2, near**2, far, near])

    def ratio(means: np.ndarray) -> float:
        denominator = means[1] - means[3] ** 2
        return (means[0] - means[2] ** 2) / denominator if denominator > 0 else 0.0

    value, se = jackknife(np.asarray(rows), ratio)
    return Estimate(float(value), float(se))
