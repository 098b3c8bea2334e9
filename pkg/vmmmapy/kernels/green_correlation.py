"""Closed-form correlation functions of moving averages driven by Green's-function kernels"""
from __future__ import annotations

# Built-in
import math

# Third-Party
import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, special

# This project
from vmmmapy.errors import DomainError
from .families import EllipticGreen, HyperbolicGreen, ParabolicGreen

__all__: tuple[str, ...] = ("parabolic_correlation", "elliptic_correlation", "hyperbolic_correlation", "green_correlation")


def _pairs(z: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    lags = np.asarray(z, dtype=float)
    if lags.shape[-1] != 2:
        raise ValueError(f"lags must have a trailing axis of length 2, got shape {lags.shape}")
    return lags[..., 0], lags[..., 1]


def parabolic_correlation(alpha: float, beta: float, gamma: float, z: ArrayLike) -> np.ndarray:
    """
    Correlation of the moving average with the parabolic Green's function kernel.

    With A = gamma (z1 + 2 alpha z2 / gamma^2) / (2 sqrt(z2)) and B = sqrt(z2 (beta - alpha^2 / gamma^2)),
    rho(z) = (exp(-2AB) erfc(B - A) + exp(2AB) erfc(A + B)) / 2 for z2 > 0, extended by rho(-z) = rho(z).

    ### Arguments
    - alpha (float): Drift of the space-like axis
    - beta (float): Damping of the time-like axis
    - gamma (float): Diffusion scale
    - z (ArrayLike): Lags of shape (..., 2)

    ### Returns
    - np.ndarray: Correlations of shape z.shape[:-1]
    """
    ParabolicGreen(alpha, beta, gamma)
    z1, z2 = _pairs(z)
    flip = z2 < 0
    z1, z2 = np.where(flip, -z1, z1), np.abs(z2)
    decay = beta - alpha**2 / gamma**2

    with np.errstate(all="ignore"):
        root = np.sqrt(np.where(z2 > 0, z2, 1.0))
        a = gamma * (z1 + 2.0 * alpha * z2 / gamma**2) / (2.0 * root)
        b = np.sqrt(z2 * decay)
        damping = np.exp(-a**2 - b**2)
        first = np.where(b - a > 0, special.erfcx(b - a) * damping, np.exp(-2.0 * a * b) * special.erfc(b - a))
        second = np.where(a + b > 0, special.erfcx(a + b) * damping, np.exp(2.0 * a * b) * special.erfc(a + b))
        value = 0.5 * (first + second)
    limit = np.exp(-gamma * math.sqrt(decay) * np.abs(z1))
    return np.where(z2 > 0, value, limit)


def _elliptic_integrand(tau: float, alpha: float, gamma: float, z2: float) -> float:
    return math.sinh(alpha * tau) * float(special.k0(gamma * math.hypot(tau, z2)))


def elliptic_correlation(alpha: float, gamma: float, z: ArrayLike) -> np.ndarray:
    """
    Correlation of the moving average with the elliptic Green's function kernel.

    gamma r K1(gamma r) when alpha = 0, otherwise
    sqrt(gamma^2 - alpha^2) / asin(alpha / gamma) int_{|z1|}^inf sinh(alpha t) K0(gamma sqrt(t^2 + z2^2)) dt.

    ### Arguments
    - alpha (float): Drift, 0 <= alpha < gamma
    - gamma (float): Screening
    - z (ArrayLike): Lags of shape (..., 2)

    ### Returns
    - np.ndarray: Correlations of shape z.shape[:-1]
    """
    EllipticGreen(alpha, gamma)
    z1, z2 = _pairs(z)
    if alpha == 0:
        x = gamma * np.hypot(z1, z2)
        with np.errstate(all="ignore"):
            return np.where(x > 0, x * special.k1(np.where(x > 0, x, 1.0)), 1.0)

    constant = math.sqrt(gamma**2 - alpha**2) / math.asin(alpha / gamma)
    flat_z1, flat_z2 = np.ravel(z1), np.ravel(z2)
    out = np.empty(flat_z1.shape)
    for index, (lag1, lag2) in enumerate(zip(flat_z1, flat_z2)):
        value, _ = integrate.quad(_elliptic_integrand, abs(lag1), np.inf, args=(alpha, gamma, abs(lag2)), limit=200)
        out[index] = constant * value
    return out.reshape(np.shape(z1))


def hyperbolic_correlation(alpha: float, beta: float, z: ArrayLike, gamma: float = 0.0) -> np.ndarray:
    """exp(-alpha |z1| - beta |z2|), the hyperbolic case with gamma = 0"""
    HyperbolicGreen(alpha, beta, gamma)
    if gamma != 0:
        raise DomainError("only the hyperbolic correlation with gamma = 0 has a closed form here")
    z1, z2 = _pairs(z)
    return np.exp(-alpha * np.abs(z1) - beta * np.abs(z2))


def green_correlation(family: ParabolicGreen | EllipticGreen | HyperbolicGreen, z: ArrayLike) -> np.ndarray:
    """Dispatch to the closed-form correlation of a Green's function family"""
    if isinstance(family, ParabolicGreen):
        return parabolic_correlation(family.alpha, family.beta, family.gamma, z)
    if isinstance(family, EllipticGreen):
        return elliptic_correlation(family.alpha, family.gamma, z)
    if isinstance(family, HyperbolicGreen):
        return hyperbolic_correlation(family.alpha, family.beta, z, family.gamma)
    raise TypeError(f"no closed-form correlation for {type(family).__name__}")
