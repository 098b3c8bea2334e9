"""Spectral density of the correlation of a Lamperti-stationary self-similar field"""
from __future__ import annotations

# Built-in
import math
import warnings

# Third-Party
import numpy as np
from numpy.typing import ArrayLike

# This project
from vmmmapy.errors import DomainError, TruncationWarning

__all__: tuple[str, ...] = ("selfsim_spectral",)

BLOCK = 4096
MAX_TERMS = 10_000_000
# Consecutive small terms required before stopping
QUIET_TERMS = 5


def _coefficients(hurst: float, start: int, stop: int, previous: float) -> np.ndarray:
    """Generalised binomials C(2H, k) for start <= k < stop, given C(2H, start - 1)"""
    k = np.arange(start, stop, dtype=float)
    return previous * np.cumprod((2.0 * hurst - k + 1.0) / k)


def selfsim_spectral(hurst: float, w: ArrayLike, tol: float = 1e-10) -> np.ndarray | float:
    """
    gamma(w) = (1 / 2 pi) sum_k C(2H, k) (-1)^{k-1} (k - H) / ((k - H)^2 + w^2).

    The sum stops once five consecutive terms fall below tol past k = 2H + 2; the remainder of an eventually
    monotone power-law tail is then added by an Euler-Maclaurin estimate.

    ### Arguments
    - hurst (float): Self-similarity index in (0, 1)
    - w (ArrayLike): Frequencies
    - tol (float): Term size at which the series stops

    ### Returns
    - np.ndarray | float: Density values, the shape of w
    """
    if not 0 < hurst < 1:
        raise DomainError(f"the self-similar spectral density needs 0 < H < 1, got {hurst!r}")
    if not tol > 0:
        raise ValueError("tol must be strictly positive")
    frequencies = np.asarray(w, dtype=float)
    flat = frequencies.ravel()
    squared = flat**2

    total = hurst / (hurst**2 + squared)
    coefficient = 1.0
    start = 1
    quiet = 0
    last = np.zeros_like(flat)
    before_last = np.zeros_like(flat)
    stop_index = 0
    while start < MAX_TERMS:
        stop = start + BLOCK
        coefficients = _coefficients(hurst, start, stop, coefficient)
        coefficient = float(coefficients[-1])
        k = np.arange(start, stop, dtype=float)
        signs = np.where(k % 2 == 1, 1.0, -1.0)
        shift = (k - hurst)[:, np.newaxis]
        terms = (coefficients * signs)[:, np.newaxis] * shift / (shift**2 + squared)

        small = np.max(np.abs(terms), axis=1, initial=0.0) < tol
        eligible = small & (k > 2.0 * hurst + 2.0)
        # first index where QUIET_TERMS consecutive eligible terms end
        stop_row = None
        for row, flag in enumerate(eligible):
            quiet = quiet + 1 if flag else 0
            if quiet >= QUIET_TERMS:
                stop_row = row
                break
        if stop_row is None:
            total = total + terms.sum(axis=0)
            before_last, last = (terms[-2], terms[-1]) if len(terms) > 1 else (last, terms[-1])
            start = stop
            continue
        total = total + terms[:stop_row + 1].sum(axis=0)
        last = terms[stop_row]
        before_last = terms[stop_row - 1] if stop_row > 0 else before_last
        stop_index = int(k[stop_row])
        break
    else:
        warnings.warn(f"self-similar series stopped after {MAX_TERMS} terms", TruncationWarning, stacklevel=2)
        stop_index = MAX_TERMS - 1

    with np.errstate(all="ignore"):
        monotone = (last * before_last > 0) & (np.abs(last) < np.abs(before_last))
        power = np.log(before_last / last) / math.log(stop_index / (stop_index - 1))
        tail = last * stop_index / (power - 1.0) - last / 2.0
    total = total + np.where(monotone & (power > 1.0) & np.isfinite(tail), tail, 0.0)

    result = (total / (2.0 * math.pi)).reshape(frequencies.shape)
    return float(result) if result.ndim == 0 else result
