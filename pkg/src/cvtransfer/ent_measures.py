"""Two-qubit entanglement: partial-transpose spectrum, concurrence and
entanglement of formation.

All functions taking ``rho`` also accept stacks of shape ``(P, 4, 4)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DomainError
from .numerics import HERMITIAN_TOL, eigvals_hermitian4, sqrt_psd4

X_FORM_TOL = 1e-12
_DENSITY_TOL = 1e-8
_EIG_NOISE = 8 * np.finfo(float).eps

# positions that must vanish for an X-shaped matrix with rho23 = 0 as well
_X_ZEROS = ((0, 1), (0, 2), (1, 3), (2, 3), (1, 2))

_SIGMA_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def check_density(rho) -> np.ndarray:
    """Validate a (stack of) two-qubit density matrices and return it as complex."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise ContractViolation(f"expected 4x4 density matrices, got shape {rho.shape}")
    herm_dev = np.max(np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))), initial=0.0)
    if herm_dev > HERMITIAN_TOL:
        raise ContractViolation(f"density matrix not Hermitian (deviation {herm_dev:.3e})")
    tr = np.real(np.trace(rho, axis1=-2, axis2=-1))
    if np.any(np.abs(tr - 1) > _DENSITY_TOL):
        raise ContractViolation(f"density matrix trace deviates from 1: {tr}")
    if np.min(eigvals_hermitian4(rho)) < -_DENSITY_TOL:
        raise ContractViolation("density matrix has a negative eigenvalue")
    return rho


def is_x_form(rho, tol: float = X_FORM_TOL):
    """True where only the diagonal and the (1,4)/(4,1) corners are nonzero."""
    rho = np.asarray(rho)
    mags = np.stack([np.abs(rho[..., i, j]) for i, j in _X_ZEROS], axis=-1)
    return np.all(mags <= tol, axis=-1)


def partial_transpose(rho) -> np.ndarray:
    """Transpose over qubit B."""
    rho = np.asarray(rho)
    t = rho.reshape(rho.shape[:-2] + (2, 2, 2, 2))
    t = np.swapaxes(t, -3, -1)
    return t.reshape(rho.shape)


def ppt_eigenvalues_xform(rho) -> np.ndarray:
    """Closed-form partial-transpose spectrum of an X-shaped state, ascending."""
    rho = np.asarray(rho)
    r11 = np.real(rho[..., 0, 0])
    r22 = np.real(rho[..., 1, 1])
    r33 = np.real(rho[..., 2, 2])
    r44 = np.real(rho[..., 3, 3])
    root = np.sqrt((r22 - r33) ** 2 + 4 * np.abs(rho[..., 0, 3]) ** 2)
    lam = np.stack([r44, r11, 0.5 * (r22 + r33 + root), 0.5 * (r22 + r33 - root)], axis=-1)
    return np.sort(lam, axis=-1)


def _ppt_eigs(rho) -> np.ndarray:
    general = eigvals_hermitian4(partial_transpose(rho))
    mask = is_x_form(rho)
    if np.any(mask):
        general = np.where(mask[..., None], ppt_eigenvalues_xform(rho), general)
    return general


def ppt_eigenvalues(rho) -> np.ndarray:
    """Eigenvalues of the partial transpose, ascending.

    X-shaped inputs use the closed form; others go through the Hermitian
    eigensolver.
    """
    return _ppt_eigs(check_density(rho))


def lambda4_tss(p00: float, g_tau: float, prep_case: str) -> float:
    """Smallest partial-transpose eigenvalue for a two-state superposition
    at resonance with equal arms.

    ``prep_case`` is ``"ground_ground"`` or ``"excited_excited"``.
    """
    if not 0 <= p00 <= 1:
        raise DomainError(f"P00 must lie in [0, 1], got {p00!r}")
    p11 = 1 - p00
    s1, c1 = math.sin(g_tau), math.cos(g_tau)
    mix = math.sqrt(p11 * p00)
    if prep_case == "ground_ground":
        return s1 ** 2 * (p11 * c1 ** 2 - mix)
    if prep_case == "excited_excited":
        s2, c2 = math.sin(math.sqrt(2) * g_tau), math.cos(math.sqrt(2) * g_tau)
        return p11 * s2 ** 2 * c2 ** 2 + s1 ** 2 * (p00 * c1 ** 2 - mix * c2 ** 2)
    raise DomainError(f"unknown preparation case {prep_case!r}")


def _clip_noise(w: np.ndarray) -> np.ndarray:
    scale = np.maximum(np.max(np.abs(w), axis=-1, keepdims=True), 1.0)
    return np.where(w <= _EIG_NOISE * scale, 0.0, w)


def _concurrence_general(rho) -> np.ndarray:
    root = sqrt_psd4(rho)
    flipped = _SIGMA_YY @ np.conj(rho) @ _SIGMA_YY
    m = root @ flipped @ root
    m = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    w = _clip_noise(eigvals_hermitian4(m))
    lam = np.sqrt(w)[..., ::-1]
    c = lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]
    return np.maximum(c, 0.0)


def concurrence_xform(rho) -> np.ndarray:
    """Concurrence of an X-shaped state from its entries."""
    rho = np.asarray(rho)
    r11, r22, r33, r44 = (np.real(rho[..., i, i]) for i in range(4))
    prod_14 = np.sqrt(np.clip(r22 * r33, 0, None))
    prod_23 = np.sqrt(np.clip(r11 * r44, 0, None))
    c = 2 * np.maximum(np.abs(rho[..., 0, 3]) - prod_14, np.abs(rho[..., 1, 2]) - prod_23)
    return np.maximum(c, 0.0)


def concurrence(rho):
    """Concurrence from the spin-flipped state.

    The decreasing square roots of the spectrum of ``sqrt(rho) rho~ sqrt(rho)``
    enter ``max(0, L1 - L2 - L3 - L4)``; this Hermitian matrix shares its
    spectrum with ``rho rho~``.
    """
    rho = check_density(rho)
    c = _concurrence_general(rho)
    return float(c) if np.ndim(c) == 0 else c


def entanglement_of_formation(c):
    """Entanglement of formation in ebits for concurrence ``c``."""
    c = np.asarray(c, dtype=float)
    if np.any(c < -1e-12) or np.any(c > 1 + 1e-12) or np.any(np.isnan(c)):
        raise DomainError(f"concurrence must lie in [0, 1], got {c}")
    c = np.clip(c, 0.0, 1.0)
    s = np.sqrt(np.clip(1 - c * c, 0.0, None))
    p = 0.5 * (1 + s)
    q = 0.5 * (1 - s)
    with np.errstate(divide="ignore", invalid="ignore"):
        hp = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1)), 0.0)
        hq = np.where(q > 0, -q * np.log2(np.where(q > 0, q, 1)), 0.0)
    e = hp + hq
    return float(e) if e.ndim == 0 else e


@dataclass(frozen=True)
class EntanglementReport:
    ppt_eigs: tuple
    lambda4: float
    concurrence: float
    eof: float
    x_form: bool


def report_batch(rho) -> dict:
    """Vectorised :func:`report`: a dict of arrays keyed by report field."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 2:
        rho = rho[None]
    rho = check_density(rho)
    xmask = is_x_form(rho)
    eigs = _ppt_eigs(rho)
    conc = np.empty(len(rho))
    if np.any(xmask):
        conc[xmask] = concurrence_xform(rho[xmask])
    if np.any(~xmask):
        conc[~xmask] = _concurrence_general(rho[~xmask])
    conc = np.minimum(conc, 1.0)
    return {
        "ppt_eigs": eigs,
        "lambda4": eigs[:, 0],
        "concurrence": conc,
        "eof": np.atleast_1d(entanglement_of_formation(conc)),
        "x_form": xmask,
    }


def report(rho) -> EntanglementReport:
    """Full entanglement summary of one two-qubit state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ContractViolation("report expects a single 4x4 matrix")
    r = report_batch(rho[None])
    return EntanglementReport(
        ppt_eigs=tuple(float(v) for v in r["ppt_eigs"][0]),
        lambda4=float(r["lambda4"][0]),
        concurrence=float(r["concurrence"][0]),
        eof=float(r["eof"][0]),
        x_form=bool(r["x_form"][0]),
    )
