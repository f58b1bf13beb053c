"""Small numerical kernels: modified Bessel functions, 4x4 Hermitian spectra,
PSD square roots and monotone bisection.

The matrix routines accept a single ``(4, 4)`` array or a stack ``(..., 4, 4)``
so that sweeps can push whole batches through one call.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import BracketError, ContractViolation, DomainError, NotPSDError

BESSEL_Y_MAX = 60.0
HERMITIAN_TOL = 1e-10
PSD_CLAMP_TOL = 1e-8

# Eigenvalues below this fraction of the spectral radius are rounding noise
# of the eigensolver and are set to zero before taking square roots.
_EIG_NOISE = 8 * np.finfo(float).eps


def bessel_i(order: int, y: float) -> float:
    """Modified Bessel function of the first kind, I_0 or I_1.

    Summed from the ascending power series
    ``I_v(y) = sum_m (y/2)^(2m+v) / (m! (m+v)!)``; every term is positive, so
    the sum is stable for ``0 <= y <= 60``.
    """
    if order not in (0, 1):
        raise DomainError(f"bessel_i supports orders 0 and 1, got {order!r}")
    y = float(y)
    if not (0.0 <= y <= BESSEL_Y_MAX) or math.isnan(y):
        raise DomainError(f"bessel_i needs 0 <= y <= {BESSEL_Y_MAX}, got {y!r}")
    half = 0.5 * y
    term = 1.0 if order == 0 else half
    total = term
    q = half * half
    m = 0
    while True:
        m += 1
        term *= q / (m * (m + order))
        total += term
        if term <= 1e-17 * total:
            return total


def bessel_i_array(order: int, y) -> np.ndarray:
    """Vectorised :func:`bessel_i` over an array of arguments."""
    y = np.asarray(y, dtype=float)
    return np.vectorize(lambda v: bessel_i(order, v), otypes=[float])(y)


def _check_square4(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape[-2:] != (4, 4):
        raise ContractViolation(f"expected (..., 4, 4) matrices, got shape {m.shape}")
    return m


def _check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    dev = np.max(np.abs(m - np.conj(np.swapaxes(m, -1, -2))), initial=0.0)
    if dev > tol:
        raise ContractViolation(f"matrix is not Hermitian (max deviation {dev:.3e})")


def eigvals_hermitian4(h) -> np.ndarray:
    """Real eigenvalues of a Hermitian 4x4 matrix (or stack), ascending."""
    h = _check_square4(h)
    _check_hermitian(h)
    herm = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    return np.linalg.eigvalsh(herm)


def sqrt_psd4(m) -> np.ndarray:
    """Hermitian PSD square root S of M, so that S @ S == M.

    Slightly negative eigenvalues (rounding noise, down to -1e-8) are clamped
    to zero; anything more negative raises :class:`NotPSDError`.
    """
    m = _check_square4(m)
    _check_hermitian(m)
    herm = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    w, v = np.linalg.eigh(herm)
    if np.any(w < -PSD_CLAMP_TOL):
        raise NotPSDError(f"matrix has eigenvalue {w.min():.3e} < -{PSD_CLAMP_TOL}")
    scale = np.maximum(np.max(np.abs(w), axis=-1, keepdims=True), 1.0)
    w = np.where(w <= _EIG_NOISE * scale, 0.0, w)
    root = np.sqrt(w)
    return (v * root[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def bisect_increasing(
    f: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    tol: float = 1e-10,
) -> float:
    """Solve ``f(x) = target`` for nondecreasing ``f`` on ``[lo, hi]``."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    if lo > hi:
        raise BracketError(f"empty bracket [{lo}, {hi}]")
    flo, fhi = f(lo), f(hi)
    if not (flo <= target <= fhi):
        raise BracketError(
            f"target {target!r} not bracketed: f({lo})={flo!r}, f({hi})={fhi!r}"
        )
    if flo == target:
        return lo
    if fhi == target:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm - target) <= tol:
            return mid
        if fm < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
