"""Spectral densities of mixed kernels and correlations recovered from them"""
from __future__ import annotations

# Built-in
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Literal, Sequence

# Third-Party
import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from scipy import fft
from scipy.interpolate import RegularGridInterpolator

# This project
from vmmmapy.errors import AliasingWarning, GridMismatchError
from vmmmapy.kernels.grid import GridSpec
from vmmmapy.kernels.kernel import Kernel, KernelTable

__all__: tuple[str, ...] = (
    "SpectralDensity",
    "centered_dft",
    "frequency_grid",
    "spectral_from_kernel",
    "correlation_from_spectral",
)

ALIASING_TOLERANCE = 1e-6
NEGATIVE_TOLERANCE = 1e-12
EVEN_TOLERANCE = 1e-10
# Lag-frequency products held at once in correlation_from_spectral
BLOCK_SIZE = 2**22


def centered_dft(values: np.ndarray, axes: Sequence[int], sign: Literal[-1, 1] = -1) -> np.ndarray:
    """
    F_m = sum_n v_n exp(sign i 2 pi (m - c)(n - c) / N) with c = (N - 1) / 2 along every axis.

    Odd N puts both indices on integers, even N on half-integers.

    ### Arguments
    - values (np.ndarray): Input array
    - axes (Sequence[int]): Axes to transform
    - sign (int): -1 for the forward transform, +1 for the inverse kernel without 1/N

    ### Returns
    - np.ndarray: Complex transform of the same shape
    """
    out = np.asarray(values, dtype=complex)
    for axis in axes:
        count = out.shape[axis]
        center = (count - 1) / 2
        index = np.arange(count)
        shape = [1] * out.ndim
        shape[axis] = count
        twiddle = np.exp(-sign * 2j * math.pi * center * index / count).reshape(shape)
        if sign < 0:
            transformed = fft.fft(out * twiddle, axis=axis)
        else:
            transformed = fft.ifft(out * twiddle, axis=axis) * count
        out = transformed * twiddle * np.exp(sign * 2j * math.pi * center**2 / count)
    return out


def frequency_grid(lag_grid: GridSpec) -> GridSpec:
    """The centred frequency lattice dual to a lag lattice of the same counts"""
    steps = tuple(2.0 * math.pi / (n * s) for n, s in zip(lag_grid.count, lag_grid.step))
    return GridSpec(
        tuple((1 - n) / 2 * du for n, du in zip(lag_grid.count, steps)),
        steps,
        lag_grid.count,
    )


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    """
    A nonnegative even function of frequency tabulated on a centred frequency lattice.

    ### Arguments
    - frequencies (GridSpec): Centred frequency lattice
    - values (np.ndarray): Nonnegative values of shape frequencies.shape
    - kind (str): "tabulated", or "self_similar" when built from the Lamperti series
    - hurst (float | None): Index of a self-similar density

    ### Returns
    - None
    """

    frequencies: GridSpec
    values: np.ndarray
    kind: Literal["tabulated", "self_similar"] = "tabulated"
    hurst: float | None = None
    _interpolator: RegularGridInterpolator | None = field(init=False, repr=False, default=None)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).reshape(self.frequencies.shape)
        if np.any(values < -NEGATIVE_TOLERANCE):
            raise ValueError("a spectral density must be nonnegative")
        values = np.maximum(values, 0.0)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def self_similar(cls, hurst: float, frequencies: GridSpec, tol: float = 1e-10) -> SpectralDensity:
        """Tabulate the series density of the Lamperti correlation on a one-dimensional frequency lattice"""
        # Imported here, selfsimilar depends on this module
        from .selfsimilar import selfsim_spectral  # pylint: disable=import-outside-toplevel

        if frequencies.dim != 1:
            raise GridMismatchError("the self-similar spectral density is one-dimensional")
        values = selfsim_spectral(hurst, frequencies.axes()[0], tol)
        return cls(frequencies, values, "self_similar", hurst)

    @property
    def dim(self) -> int:
        return self.frequencies.dim

    def integral(self) -> float:
        """sum gamma(u) du over the lattice"""
        return float(self.values.sum()) * self.frequencies.cell_volume

    def is_even(self, tol: float = EVEN_TOLERANCE) -> bool:
        flipped = np.flip(self.values)
        return bool(self.frequencies.is_symmetric() and np.max(np.abs(self.values - flipped), initial=0.0) <= tol)

    def evaluate(self, u: ArrayLike) -> np.ndarray:
        """Multilinear interpolation of the table, zero outside"""
        if self.kind == "self_similar" and self.hurst is not None:
            from .selfsimilar import selfsim_spectral  # pylint: disable=import-outside-toplevel

            return selfsim_spectral(self.hurst, u)
        if self._interpolator is None:
            interpolator = RegularGridInterpolator(
                self.frequencies.axes(), self.values, method="linear", bounds_error=False, fill_value=0.0
            )
            object.__setattr__(self, "_interpolator", interpolator)
        points = np.asarray(u, dtype=float)
        if self.dim == 1 and (points.ndim == 0 or points.shape[-1] != 1):
            points = points[..., np.newaxis]
        return self._interpolator(points)  # type: ignore[misc]

    def to_frame(self) -> pd.DataFrame:
        """Columns u1..ud followed by value"""
        frame = pd.DataFrame(self.frequencies.points(), columns=[f"u{axis + 1}" for axis in range(self.dim)])
        frame["value"] = self.values.ravel()
        return frame

    def to_dict(self) -> dict[str, Any]:
        return {
            "frequencies": self.frequencies.to_dict(),
            "kind": self.kind,
            "hurst": self.hurst,
            "integral": self.integral(),
        }


def _truncated_ends(kernel: Kernel, grid: GridSpec) -> tuple[tuple[bool, bool], ...]:
    return tuple(
        (lo < axis[0] - s / 2, hi > axis[-1] + s / 2)
        for (lo, hi), axis, s in zip(kernel.support_box(), grid.axes(), grid.step)
    )


def spectral_from_kernel(kernel: Kernel | KernelTable, grid: GridSpec | None = None,
                         padding: Literal["linear", "periodic"] = "linear") -> SpectralDensity:
    """
    gamma(u) = int |g^(x, u)|^2 p(dx) from a step-weighted discrete Fourier transform.

    ### Arguments
    - kernel (Kernel | KernelTable): The kernel, or a tabulation of it
    - grid (GridSpec | None): Lag lattice to tabulate a Kernel on
    - padding (str): "linear" zero-pads every axis to 2N - 1 nodes so that no wrap-around occurs,
      "periodic" transforms the table as it stands

    ### Returns
    - SpectralDensity: Even and nonnegative, with sum gamma du = sum g~ dz
    """
    if isinstance(kernel, Kernel):
        if grid is None:
            raise ValueError("a lag grid is needed to tabulate the kernel")
        table = kernel.tabulate(grid, _truncated_ends(kernel, grid))
    else:
        table = kernel
    window = table.window

    fraction = table.boundary_fraction()
    if fraction > ALIASING_TOLERANCE:
        warnings.warn(
            f"kernel keeps {fraction:.3g} of its mass on the edge of {window.to_dict()}, the spectrum is aliased",
            AliasingWarning,
            stacklevel=2,
        )

    values = table.values
    if padding == "linear":
        pad = [(0, 0)] + [(0, n - 1) for n in window.count]
        values = np.pad(values, pad)
        lag_grid = GridSpec(window.origin, window.step, tuple(2 * n - 1 for n in window.count))
    elif padding == "periodic":
        lag_grid = window
    else:
        raise ValueError(f"unknown padding {padding!r}")

    axes = tuple(range(1, values.ndim))
    scale = (2.0 * math.pi) ** (-window.dim / 2) * window.cell_volume
    transform = centered_dft(values, axes) * scale
    spectrum = np.tensordot(table.weights, np.abs(transform) ** 2, axes=1)
    spectrum = 0.5 * (spectrum + np.flip(spectrum))
    return SpectralDensity(frequency_grid(lag_grid), spectrum)


def correlation_from_spectral(spectral: SpectralDensity, lags: ArrayLike) -> np.ndarray:
    """
    rho(h) = sum_u gamma(u) cos(h . u) / sum_u gamma(u).

    ### Arguments
    - spectral (SpectralDensity): Density on a symmetric lattice
    - lags (ArrayLike): Lags of shape (..., d); d=1 lags may drop the trailing axis

    ### Returns
    - np.ndarray: Correlations, zero everywhere for a vanishing density
    """
    if not spectral.frequencies.is_symmetric():
        raise GridMismatchError("correlations need a spectral density on a symmetric frequency lattice")
    points = np.asarray(lags, dtype=float)
    if spectral.dim == 1 and (points.ndim == 0 or points.shape[-1] != 1):
        points = points[..., np.newaxis]
    flat = points.reshape(-1, spectral.dim)

    frequencies = spectral.frequencies.points()
    weights = spectral.values.ravel()
    active = weights > 0
    frequencies, weights = frequencies[active], weights[active]
    total = weights.sum()
    out = np.zeros(len(flat))
    if total > 0:
        rows = max(1, BLOCK_SIZE // len(weights))
        for start in range(0, len(flat), rows):
            phase = flat[start:start + rows] @ frequencies.T
            out[start:start + rows] = np.cos(phase) @ weights / total
    return out.reshape(points.shape[:-1])
