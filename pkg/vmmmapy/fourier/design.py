"""Kernels designed from a target covariance through even or odd roots of its spectral density"""
from __future__ import annotations

# Built-in
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal, Sequence

# Third-Party
import numpy as np
import pandas as pd

# This project
from vmmmapy.errors import GridMismatchError, NotACovarianceError
from vmmmapy.kernels.families import Tabulated
from vmmmapy.kernels.grid import GridSpec
from vmmmapy.kernels.kernel import Kernel, KernelTable
from .spectral import SpectralDensity, centered_dft, correlation_from_spectral, frequency_grid, spectral_from_kernel

__all__: tuple[str, ...] = (
    "CovarianceTable",
    "DesignedKernel",
    "kernel_from_covariance",
    "kernel_from_separable_covariance",
    "vmma_equivalent",
    "roundtrip_error",
)

Root = Literal["even", "odd"]

# Spectral values below -BOCHNER_TOLERANCE are not a floating-point artefact
BOCHNER_TOLERANCE = 1e-8
INTERIOR_SHARE = 0.8
# Largest share of the correlation mass the odd root may lose with the zero frequency
ODD_ROOT_OFFSET = 4e-4


@dataclass(frozen=True, eq=False)
class CovarianceTable:
    """
    A target covariance R tabulated on a symmetric one-dimensional lag lattice through zero.

    ### Arguments
    - lags (GridSpec): Symmetric lag lattice with an odd number of lags
    - values (np.ndarray): R at every lag
    - variance (float): R(0)

    ### Returns
    - None
    """

    lags: GridSpec
    values: np.ndarray
    variance: float

    def __post_init__(self) -> None:
        if self.lags.dim != 1 or not self.lags.is_symmetric():
            raise GridMismatchError("a covariance table lives on a symmetric one-dimensional lag lattice")
        if self.lags.count[0] % 2 == 0:
            raise GridMismatchError("covariance lags must include zero, use an odd number of lags")
        values = np.asarray(self.values, dtype=float).reshape(self.lags.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("covariance values must be finite")
        if not self.variance > 0:
            raise NotACovarianceError(f"not a covariance: R(0) = {self.variance!r} must be positive")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, function: Any, step: float, count: int, variance: float | None = None) -> CovarianceTable:
        """Tabulate R(h) on the symmetric lattice of count lags spaced by step"""
        lags = GridSpec.symmetric(step, count)
        values = np.asarray(function(lags.axes()[0]), dtype=float)
        return cls(lags, values, float(function(np.array(0.0))) if variance is None else variance)

    @classmethod
    def gaussian(cls, scale: float, step: float, count: int, variance: float = 1.0) -> CovarianceTable:
        return cls.from_function(lambda h: variance * np.exp(-0.5 * (h / scale) ** 2), step, count, variance)

    @classmethod
    def exponential(cls, scale: float, step: float, count: int, variance: float = 1.0) -> CovarianceTable:
        return cls.from_function(lambda h: variance * np.exp(-np.abs(h) / scale), step, count, variance)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, variance: float | None = None) -> CovarianceTable:
        """Read a table with columns lag and value, R(0) defaults to the value at lag zero"""
        if not {"lag", "value"} <= set(frame.columns):
            raise ValueError("a covariance table needs the columns lag and value")
        frame = frame.sort_values("lag", kind="mergesort")
        lags = frame["lag"].to_numpy(dtype=float)
        values = frame["value"].to_numpy(dtype=float)
        spacing = np.diff(lags)
        if len(lags) < 2 or not np.allclose(spacing, spacing[0], rtol=1e-6, atol=0.0):
            raise ValueError("covariance lags must be evenly spaced")
        grid = GridSpec.symmetric(float(spacing[0]), len(lags))
        if not np.allclose(lags, grid.axes()[0], rtol=0.0, atol=1e-6 * spacing[0]):
            raise GridMismatchError("covariance lags must be symmetric around zero")
        if variance is None and len(lags) % 2 == 1:
            variance = float(values[len(lags) // 2])
        return cls(grid, values, 0.0 if variance is None else variance)

    @classmethod
    def from_csv(cls, path: Path | str, variance: float | None = None) -> CovarianceTable:
        return cls.from_frame(pd.read_csv(path), variance)

    def correlation(self) -> np.ndarray:
        """R / R(0), mirrored so that it is exactly even"""
        values = self.values / self.variance
        return 0.5 * (values + values[::-1])

    def padded(self, count: int) -> CovarianceTable:
        """The same covariance on a longer lattice, zero beyond the tabulated lags"""
        if count < self.lags.count[0] or count % 2 == 0:
            raise GridMismatchError(f"cannot pad {self.lags.count[0]} lags to {count}")
        pad = (count - self.lags.count[0]) // 2
        return CovarianceTable(GridSpec.symmetric(self.lags.step[0], count), np.pad(self.values, pad), self.variance)

    def spectral(self, clip: bool = False) -> SpectralDensity:
        """
        S(u) = (1 / 2 pi) sum_h R(h) cos(u h) dh / R(0), the density of the correlation.

        ### Arguments
        - clip (bool): Zero negative values instead of raising

        ### Returns
        - SpectralDensity: Raises NotACovarianceError when the transform is clearly negative
        """
        step = self.lags.step[0]
        spectrum = np.real(centered_dft(self.correlation(), (0,))) * step / (2.0 * math.pi)
        worst = float(spectrum.min(initial=0.0))
        if worst < -BOCHNER_TOLERANCE and not clip:
            raise NotACovarianceError(f"not a covariance: its spectral transform reaches {worst:.3g}")
        return SpectralDensity(frequency_grid(self.lags), np.maximum(spectrum, 0.0))

    def odd_root_count(self, offset: float = ODD_ROOT_OFFSET) -> int:
        """
        Smallest odd lattice length on which dropping the zero frequency moves the correlation by at most offset.

        The zero frequency carries sum_h rho(h) / N of the spectrum, so the odd root reproduces
        (rho - c) / (1 - c) with c = sum_h rho(h) / N.
        """
        mass = float(self.correlation().sum())
        count = max(self.lags.count[0], math.ceil(mass / offset))
        return count + 1 - count % 2

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"lag": self.lags.axes()[0], "value": self.values})


@dataclass(frozen=True, eq=False)
class DesignedKernel:
    """A designed tabulated kernel with the spectrum it realises"""

    kernel: Kernel
    spectrum: SpectralDensity
    root: Root
    target: CovarianceTable | None = None

    @property
    def family(self) -> Tabulated:
        assert isinstance(self.kernel.family, Tabulated)
        return self.kernel.family

    def to_dict(self) -> dict[str, Any]:
        report: dict[str, Any] = {"root": self.root, "grid": self.family.grid.to_dict(), "spectrum": self.spectrum.to_dict()}
        if self.target is not None:
            report["target_lags"] = self.target.lags.to_dict()
            report["roundtrip_error"] = roundtrip_error(self)
        return report


def _root_kernel(spectrum: np.ndarray, lag_grid: GridSpec, root: Root) -> np.ndarray:
    """
    The real kernel f on lag_grid with |f^(u)|^2 = spectrum on the dual frequency lattice.

    The odd root vanishes at the zero frequency, so there it realises 0 instead of spectrum.

    ### Arguments
    - spectrum (np.ndarray): Nonnegative even spectrum on frequency_grid(lag_grid)
    - lag_grid (GridSpec): Symmetric lag lattice
    - root (str): "even" takes sqrt(spectrum), "odd" takes -sign(u1) sqrt(spectrum)

    ### Returns
    - np.ndarray: Kernel values, exactly even or odd under z -> -z
    """
    if root not in ("even", "odd"):
        raise ValueError(f"unknown root {root!r}")
    frequencies = frequency_grid(lag_grid)
    amplitude = np.sqrt(np.maximum(spectrum, 0.0))
    if root == "odd":
        first = frequencies.axes()[0].reshape((-1,) + (1,) * (lag_grid.dim - 1))
        amplitude = -np.sign(np.round(first / frequencies.step[0], 6)) * amplitude

    scale = (2.0 * math.pi) ** (-lag_grid.dim / 2) * frequencies.cell_volume
    transform = centered_dft(amplitude, tuple(range(lag_grid.dim)), sign=1) * scale
    if root == "even":
        values = np.real(transform)
        return 0.5 * (values + np.flip(values))
    values = np.imag(transform)
    return 0.5 * (values - np.flip(values))


def kernel_from_covariance(covariance: CovarianceTable, root: Root = "even") -> DesignedKernel:
    """
    Build f with |f^|^2 equal to the spectral density of R / R(0).

    The even root lives on the lag lattice of the covariance. The odd root lives on the zero-padded lattice of
    CovarianceTable.odd_root_count, where the zero frequency it cannot carry is a negligible share.

    ### Arguments
    - covariance (CovarianceTable): Target covariance on a symmetric lag lattice
    - root (str): "even" or "odd"

    ### Returns
    - DesignedKernel: Tabulated kernel with the spectrum it realises
    """
    if root not in ("even", "odd"):
        raise ValueError(f"unknown root {root!r}")
    spectrum = covariance.spectral()
    lattice = covariance
    if root == "odd":
        lattice = covariance.padded(covariance.odd_root_count())
        spectrum = lattice.spectral(clip=True)
    values = _root_kernel(spectrum.values, lattice.lags, root)
    realised = spectrum.values
    if root == "odd":
        realised = realised.copy()
        realised[lattice.lags.count[0] // 2] = 0.0
    kernel = Kernel(Tabulated(lattice.lags, values))
    return DesignedKernel(kernel, SpectralDensity(spectrum.frequencies, realised), root, covariance)


def kernel_from_separable_covariance(covariances: Sequence[CovarianceTable], root: Root | Sequence[Root] = "even") -> DesignedKernel:
    """
    Tensor product of one-dimensional designed kernels, realising R(h) = prod_j R_j(h_j).

    ### Arguments
    - covariances (Sequence[CovarianceTable]): One factor per axis
    - root (str | Sequence[str]): Root per axis, or one for all

    ### Returns
    - DesignedKernel: A d-dimensional tabulated kernel without a one-dimensional target
    """
    if not covariances:
        raise ValueError("at least one covariance factor is required")
    roots = [root] * len(covariances) if isinstance(root, str) else list(root)
    if len(roots) != len(covariances):
        raise ValueError("one root per covariance factor")
    factors = [kernel_from_covariance(cov, r) for cov, r in zip(covariances, roots)]  # type: ignore[arg-type]

    values = factors[0].family.values
    spectrum = factors[0].spectrum.values
    for factor in factors[1:]:
        values = np.multiply.outer(values, factor.family.values)
        spectrum = np.multiply.outer(spectrum, factor.spectrum.values)
    axes = [factor.family.grid for factor in factors]
    grid = GridSpec(
        tuple(axis.origin[0] for axis in axes),
        tuple(axis.step[0] for axis in axes),
        tuple(axis.count[0] for axis in axes),
    )
    combined = "odd" if roots.count("odd") % 2 == 1 else "even"
    return DesignedKernel(Kernel(Tabulated(grid, values)), SpectralDensity(frequency_grid(grid), spectrum), combined)


def vmma_equivalent(kernel: Kernel, grid: GridSpec, root: Root = "even") -> DesignedKernel:
    """
    A single moving-average kernel with the same spectral density as a mixed kernel.

    The mixed kernel is tabulated on grid and zero-padded to a symmetric lattice long enough that circular and
    linear autocorrelations agree, so both fields share their covariance at every lattice lag. An odd root
    realises the spectrum with its zero frequency removed.

    ### Arguments
    - kernel (Kernel): The mixed kernel
    - grid (GridSpec): Lag window tabulating it
    - root (str): "even" or "odd"

    ### Returns
    - DesignedKernel: The equivalent kernel
    """
    table = kernel.tabulate(grid)
    counts = [2 * n - 1 for n in grid.count]
    padded = np.pad(table.values, [(0, 0)] + [(0, m - n) for m, n in zip(counts, grid.count)])
    lag_grid = GridSpec(tuple((1 - m) / 2 * s for m, s in zip(counts, grid.step)), grid.step, tuple(counts))
    spectrum = spectral_from_kernel(KernelTable(lag_grid, padded, table.weights), padding="periodic")
    values = _root_kernel(spectrum.values, lag_grid, root)
    if root == "odd":
        realised = spectrum.values.copy()
        realised[counts[0] // 2] = 0.0
        spectrum = SpectralDensity(spectrum.frequencies, realised)
    return DesignedKernel(Kernel(Tabulated(lag_grid, values)), spectrum, root)


def roundtrip_error(designed: DesignedKernel, share: float = INTERIOR_SHARE) -> float:
    """
    Sup-norm distance between R / R(0) and the correlation the designed kernel reproduces.

    The kernel goes through the zero-padded spectral density and back, so lattice wrap-around is not hidden.

    ### Arguments
    - designed (DesignedKernel): Output of kernel_from_covariance
    - share (float): Central share of the target lag lattice compared

    ### Returns
    - float: The error on the interior lags
    """
    if designed.target is None:
        raise ValueError("the designed kernel carries no target covariance")
    family = designed.family
    spectrum = spectral_from_kernel(KernelTable(family.grid, family.values[np.newaxis], np.ones(1)), padding="linear")
    lags = designed.target.lags.axes()[0]
    interior = np.abs(lags) <= share * np.abs(lags).max()
    reconstructed = correlation_from_spectral(spectrum, lags[interior])
    return float(np.max(np.abs(reconstructed - designed.target.correlation()[interior])))
