"""Joint field-qubit evolution and the reduced two-qubit density matrix.

Two-qubit matrices use the ordered basis
``(|e>_A|e>_B, |e>_A|g>_B, |g>_A|e>_B, |g>_A|g>_B)``.

Three routes produce the same matrix:

* :func:`evolve_joint` + :func:`reduce_to_qubits` -- sparse state vector built
  branch by branch, then a partial trace over both modes. This is the
  reference route.
* :func:`reduced_density_batch` -- the same computation vectorised over many
  parameter points; sweeps use it.
* :func:`closed_form_elements` -- element-by-element Fock-sum formulas, kept
  as an independent cross-check.
"""
from __future__ import annotations

from collections import defaultdict

import numpy as np

from .cv_states import FockCoefficients
from .jc_core import ArmParams, Level, QubitPrep, evolve_arm_branch, jc_unitary_table

_INDEX = {
    (Level.EXCITED, Level.EXCITED): 0,
    (Level.EXCITED, Level.GROUND): 1,
    (Level.GROUND, Level.EXCITED): 2,
    (Level.GROUND, Level.GROUND): 3,
}


class JointAmplitudeMap(dict):
    """Sparse amplitudes keyed by ``(level_A, k_A, level_B, k_B)``."""

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.values()))

    def max_photon_number(self) -> int:
        return max((max(k[1], k[3]) for k in self), default=0)


def evolve_joint(
    coeffs: FockCoefficients,
    prep_a: QubitPrep,
    prep_b: QubitPrep,
    arm_a: ArmParams,
    arm_b: ArmParams,
) -> JointAmplitudeMap:
    """State of field and both qubits after the interaction."""
    psi: dict = defaultdict(complex)
    for n, cn in enumerate(coeffs.c):
        if cn == 0:
            continue
        branch_a = evolve_arm_branch(prep_a, n, arm_a)
        branch_b = evolve_arm_branch(prep_b, n, arm_b)
        for (la, ka), amp_a in branch_a.amplitudes.items():
            for (lb, kb), amp_b in branch_b.amplitudes.items():
                psi[(la, ka, lb, kb)] += cn * amp_a * amp_b
    return JointAmplitudeMap(psi)


def reduce_to_qubits(joint: JointAmplitudeMap) -> np.ndarray:
    """Trace out both field modes."""
    by_photons: dict = defaultdict(lambda: np.zeros(4, dtype=complex))
    for (la, ka, lb, kb), amp in joint.items():
        by_photons[(ka, kb)][_INDEX[(la, lb)]] += amp
    rho = np.zeros((4, 4), dtype=complex)
    for vec in by_photons.values():
        rho += np.outer(vec, vec.conj())
    return rho


# slot layout of one arm's evolved branch for initial photon number n:
# (level index, photon-number offset from n); level 0 = excited, 1 = ground
_SLOTS = ((0, 0), (1, 1), (0, -1), (1, 0))


def _arm_slots(u: np.ndarray, ground_amp, excited_amp) -> np.ndarray:
    """Branch amplitudes per slot, shape ``(P, M, 4)``, from tables ``u`` of shape ``(P, M, 2, 2)``."""
    p, m = u.shape[:2]
    g = np.asarray(ground_amp, dtype=complex).reshape(-1, 1)
    e = np.asarray(excited_amp, dtype=complex).reshape(-1, 1)
    out = np.zeros((p, m, 4), dtype=complex)
    out[:, :, 0] = e * u[:, :, 0, 0]
    out[:, :, 1] = e * u[:, :, 1, 0]
    out[:, 1:, 2] = g * u[:, :-1, 0, 1]
    out[:, 1:, 3] = g * u[:, :-1, 1, 1]
    out[:, 0, 3] = g[:, 0]
    return out


def reduced_density_batch(
    c: np.ndarray,
    prep_a: tuple,
    prep_b: tuple,
    g_tau_a,
    delta_tau_a,
    g_tau_b,
    delta_tau_b,
) -> np.ndarray:
    """Reduced two-qubit states for a batch of parameter points.

    Parameters
    ----------
    c : array, shape (P, M)
        Schmidt coefficients per point, zero padded.
    prep_a, prep_b : (ground_amp, excited_amp)
        Scalars or arrays of shape (P,).
    g_tau_a, delta_tau_a, g_tau_b, delta_tau_b : float or array of shape (P,)

    Returns
    -------
    array, shape (P, 4, 4)
    """
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    p, m = c.shape
    k = np.arange(m)[None, :]

    def col(v):
        return np.broadcast_to(np.asarray(v, dtype=float), (p,))[:, None]

    ua = jc_unitary_table(k, col(g_tau_a), col(delta_tau_a))
    ub = jc_unitary_table(k, col(g_tau_b), col(delta_tau_b))
    sa = _arm_slots(ua, *[np.broadcast_to(np.asarray(v, dtype=complex), (p,)) for v in prep_a])
    sb = _arm_slots(ub, *[np.broadcast_to(np.asarray(v, dtype=complex), (p,)) for v in prep_b])

    # banded storage: photon number k_A shifted by one, k_B - k_A in [-2, 2]
    psi = np.zeros((p, 2, 2, m + 2, 5), dtype=complex)
    for ia, (la, da) in enumerate(_SLOTS):
        wa = c * sa[:, :, ia]
        for ib, (lb, db) in enumerate(_SLOTS):
            psi[:, la, lb, 1 + da : 1 + da + m, db - da + 2] += wa * sb[:, :, ib]
    flat = psi.reshape(p, 4, -1)
    rho = np.empty((p, 4, 4), dtype=complex)
    for i in range(4):
        for j in range(i, 4):
            rho[:, i, j] = np.sum(flat[:, i] * flat[:, j].conj(), axis=-1)
            rho[:, j, i] = rho[:, i, j].conj()
    return rho


def closed_form_elements(
    coeffs: FockCoefficients,
    prep_a: QubitPrep,
    prep_b: QubitPrep,
    arm_a: ArmParams,
    arm_b: ArmParams,
) -> np.ndarray:
    """Reduced state assembled from closed-form Fock sums for each element.

    Products ``|c_0|^2 f_j f_k^*`` are written directly as ``c_j c_k^*``.
    Terms that are easy to get wrong, each checked against
    :func:`reduce_to_qubits`:

    * rho44, ``|A1 B1|^2`` term: ``sum |c_j|^2 |a22(j-1)|^2 |b22(j-1)|^2 + |c_0|^2``
      (a product of the two moduli, not their sum).
    * rho14, ``|A2 B1|^2`` term: the sum pairs ``c_{j+1} c_j^*``.
    * rho23: the sum starts at ``j = 1``; ``j = 0`` is the separate edge term.
    * rho24, ``A1^* A2 |B1|^2`` term: the last factor is ``a22^*(j-1)``.
    * rho34, ``|B1|^2`` coherence term: the prefactor is ``A1 A2^*``.
    """
    c0 = np.asarray(coeffs.c, dtype=complex)
    m = len(c0)
    c = np.zeros(m + 3, dtype=complex)
    c[:m] = c0
    cc = c.conj()
    ks = np.arange(m + 3)
    ua = jc_unitary_table(ks, arm_a.g_tau, arm_a.delta_tau)
    ub = jc_unitary_table(ks, arm_b.g_tau, arm_b.delta_tau)
    a11, a12, a21, a22 = ua[:, 0, 0], ua[:, 0, 1], ua[:, 1, 0], ua[:, 1, 1]
    b11, b12, b21, b22 = ub[:, 0, 0], ub[:, 0, 1], ub[:, 1, 0], ub[:, 1, 1]
    A1, A2 = complex(prep_a.ground_amp), complex(prep_a.excited_amp)
    B1, B2 = complex(prep_b.ground_amp), complex(prep_b.excited_amp)
    conj = np.conj

    def sq(z):
        return np.abs(z) ** 2

    j0 = np.arange(0, m + 1)  # j = 0..m
    j1 = np.arange(1, m + 1)  # j = 1..m
    pc0 = sq(c[0])
    c1c0 = c[1] * cc[0]

    r11 = (
        sq(A2 * B2) * np.sum(sq(c[j0]) * sq(a11[j0]) * sq(b11[j0]))
        + conj(A1) * A2 * conj(B1) * B2
        * np.sum(c[j0] * cc[j0 + 1] * a11[j0] * b11[j0] * conj(a12[j0]) * conj(b12[j0]))
        + sq(A2 * B1) * np.sum(sq(c[j0 + 1]) * sq(a11[j0 + 1]) * sq(b12[j0]))
        + sq(A1 * B2) * np.sum(sq(c[j0 + 1]) * sq(a12[j0]) * sq(b11[j0 + 1]))
        + sq(A1 * B1) * np.sum(sq(c[j0 + 1]) * sq(a12[j0]) * sq(b12[j0]))
        + A1 * conj(A2) * B1 * conj(B2)
        * np.sum(c[j0 + 1] * cc[j0] * a12[j0] * b12[j0] * conj(a11[j0]) * conj(b11[j0]))
    )

    r22 = (
        sq(A2 * B2) * np.sum(sq(c[j1 - 1]) * sq(a11[j1 - 1]) * sq(b21[j1 - 1]))
        + conj(A1) * A2 * conj(B1) * B2
        * np.sum(c[j1 - 1] * cc[j1] * a11[j1 - 1] * b21[j1 - 1] * conj(a12[j1 - 1]) * conj(b22[j1 - 1]))
        + sq(A2 * B1) * (np.sum(sq(c[j1]) * sq(a11[j1]) * sq(b22[j1 - 1])) + pc0 * sq(a11[0]))
        + sq(A1 * B2) * np.sum(sq(c[j1]) * sq(a12[j1 - 1]) * sq(b21[j1]))
        + sq(A1 * B1) * np.sum(sq(c[j1]) * sq(a12[j1 - 1]) * sq(b22[j1 - 1]))
        + A1 * conj(A2) * B1 * conj(B2)
        * np.sum(c[j1] * cc[j1 - 1] * a12[j1 - 1] * b22[j1 - 1] * conj(a11[j1 - 1]) * conj(b21[j1 - 1]))
    )

    r33 = (
        sq(A2 * B2) * np.sum(sq(c[j0]) * sq(a21[j0]) * sq(b11[j0]))
        + conj(A1) * A2 * conj(B1) * B2
        * np.sum(c[j0] * cc[j0 + 1] * a21[j0] * b11[j0] * conj(a22[j0]) * conj(b12[j0]))
        + sq(A1 * B2) * (np.sum(sq(c[j1]) * sq(a22[j1 - 1]) * sq(b11[j1])) + pc0 * sq(b11[0]))
        + sq(A2 * B1) * np.sum(sq(c[j0 + 1]) * sq(a21[j0 + 1]) * sq(b12[j0]))
        + sq(A1 * B1) * np.sum(sq(c[j0 + 1]) * sq(a22[j0]) * sq(b12[j0]))
        + A1 * conj(A2) * B1 * conj(B2)
        * np.sum(c[j0 + 1] * cc[j0] * a22[j0] * b12[j0] * conj(a21[j0]) * conj(b11[j0]))
    )

    r44 = (
        sq(A2 * B2) * np.sum(sq(c[j1 - 1]) * sq(a21[j1 - 1]) * sq(b21[j1 - 1]))
        + conj(A1) * A2 * conj(B1) * B2
        * np.sum(c[j1 - 1] * cc[j1] * a21[j1 - 1] * b21[j1 - 1] * conj(a22[j1 - 1]) * conj(b22[j1 - 1]))
        + sq(A2 * B1) * (np.sum(sq(c[j1]) * sq(a21[j1]) * sq(b22[j1 - 1])) + pc0 * sq(a21[0]))
        + sq(A1 * B2) * (np.sum(sq(c[j1]) * sq(a22[j1 - 1]) * sq(b21[j1])) + pc0 * sq(b21[0]))
        + sq(A1 * B1) * (np.sum(sq(c[j1]) * sq(a22[j1 - 1]) * sq(b22[j1 - 1])) + pc0)
        + A1 * conj(A2) * B1 * conj(B2)
        * np.sum(c[j1] * cc[j1 - 1] * a22[j1 - 1] * b22[j1 - 1] * conj(a21[j1 - 1]) * conj(b21[j1 - 1]))
    )

    r12 = (
        sq(A2) * conj(B1) * B2
        * (np.sum(sq(c[j1]) * sq(a11[j1]) * b11[j1] * conj(b22[j1 - 1])) + pc0 * sq(a11[0]) * b11[0])
        + sq(A1) * conj(B1) * B2 * np.sum(sq(c[j1]) * sq(a12[j1 - 1]) * b11[j1] * conj(b22[j1 - 1]))
        + A1 * conj(A2) * sq(B2)
        * np.sum(c[j1] * cc[j1 - 1] * a12[j1 - 1] * b11[j1] * conj(a11[j1 - 1]) * conj(b21[j1 - 1]))
        + A1 * conj(A2) * sq(B1)
        * (
            np.sum(c[j1 + 1] * cc[j1] * a12[j1] * b12[j1] * conj(a11[j1]) * conj(b22[j1 - 1]))
            + c1c0 * a12[0] * b12[0] * conj(a11[0])
        )
    )

    r13 = (
        sq(A2) * B1 * conj(B2)
        * np.sum(c[j0 + 1] * cc[j0] * a11[j0 + 1] * b12[j0] * conj(a21[j0]) * conj(b11[j0]))
        + sq(A1) * B1 * conj(B2)
        * (
            np.sum(c[j1 + 1] * cc[j1] * a12[j1] * b12[j1] * conj(a22[j1 - 1]) * conj(b11[j1]))
            + c1c0 * a12[0] * b12[0] * conj(b11[0])
        )
        + conj(A1) * A2 * sq(B2)
        * (np.sum(sq(c[j1]) * a11[j1] * sq(b11[j1]) * conj(a22[j1 - 1])) + pc0 * a11[0] * sq(b11[0]))
        + conj(A1) * A2 * sq(B1) * np.sum(sq(c[j0 + 1]) * a11[j0 + 1] * sq(b12[j0]) * conj(a22[j0]))
    )

    r14 = (
        sq(A2 * B2)
        * np.sum(c[j1] * cc[j1 - 1] * a11[j1] * b11[j1] * conj(a21[j1 - 1]) * conj(b21[j1 - 1]))
        + conj(A1) * A2 * conj(B1) * B2
        * (
            np.sum(sq(c[j1]) * a11[j1] * b11[j1] * conj(a22[j1 - 1]) * conj(b22[j1 - 1]))
            + pc0 * a11[0] * b11[0]
        )
        + sq(A2 * B1)
        * (
            np.sum(c[j1 + 1] * cc[j1] * a11[j1 + 1] * b12[j1] * conj(a21[j1]) * conj(b22[j1 - 1]))
            + c1c0 * a11[1] * b12[0] * conj(a21[0])
        )
        + sq(A1 * B2)
        * (
            np.sum(c[j1 + 1] * cc[j1] * a12[j1] * b11[j1 + 1] * conj(a22[j1 - 1]) * conj(b21[j1]))
            + c1c0 * a12[0] * b11[1] * conj(b12[0])
        )
        + sq(A1 * B1)
        * (
            np.sum(c[j1 + 1] * cc[j1] * a12[j1] * b12[j1] * conj(a22[j1 - 1]) * conj(b22[j1 - 1]))
            + c1c0 * a12[0] * b12[0]
        )
        + A1 * conj(A2) * B1 * conj(B2)
        * np.sum(c[j1 + 1] * cc[j1 - 1] * a12[j1] * b12[j1] * conj(a21[j1 - 1]) * conj(b21[j1 - 1]))
    )

    r23 = conj(A1) * A2 * B1 * conj(B2) * (
        np.sum(sq(c[j1]) * a11[j1] * b22[j1 - 1] * conj(a22[j1 - 1]) * conj(b11[j1]))
        + pc0 * a11[0] * conj(b11[0])
    )

    r24 = (
        sq(A2) * B1 * conj(B2)
        * np.sum(c[j1] * cc[j1 - 1] * a11[j1] * b22[j1 - 1] * conj(a21[j1 - 1]) * conj(b21[j1 - 1]))
        + sq(A1) * B1 * conj(B2)
        * (
            np.sum(c[j1 + 1] * cc[j1] * a12[j1] * b22[j1] * conj(a22[j1 - 1]) * conj(b21[j1]))
            + c1c0 * a12[0] * b22[0] * conj(b21[0])
        )
        + conj(A1) * A2 * sq(B2)
        * (np.sum(sq(c[j1]) * a11[j1] * sq(b21[j1]) * conj(a22[j1 - 1])) + pc0 * a11[0] * sq(b21[0]))
        + conj(A1) * A2 * sq(B1)
        * (np.sum(sq(c[j1]) * a11[j1] * sq(b22[j1 - 1]) * conj(a22[j1 - 1])) + pc0 * a11[0])
    )

    r34 = (
        sq(A2) * conj(B1) * B2
        * (np.sum(sq(c[j1]) * sq(a21[j1]) * b11[j1] * conj(b22[j1 - 1])) + pc0 * sq(a21[0]) * b11[0])
        + sq(A1) * conj(B1) * B2
        * (np.sum(sq(c[j1]) * sq(a22[j1 - 1]) * b11[j1] * conj(b22[j1 - 1])) + pc0 * b11[0])
        + A1 * conj(A2) * sq(B2)
        * np.sum(c[j1] * cc[j1 - 1] * a22[j1 - 1] * b11[j1] * conj(a21[j1 - 1]) * conj(b21[j1 - 1]))
        + A1 * conj(A2) * sq(B1)
        * (
            np.sum(c[j1 + 1] * cc[j1] * a22[j1] * b12[j1] * conj(a21[j1]) * conj(b22[j1 - 1]))
            + c1c0 * a22[0] * b12[0] * conj(a21[0])
        )
    )

    rho = np.diag(np.array([r11, r22, r33, r44], dtype=complex))
    upper = {(0, 1): r12, (0, 2): r13, (0, 3): r14, (1, 2): r23, (1, 3): r24, (2, 3): r34}
    for (i, j), v in upper.items():
        rho[i, j] = v
        rho[j, i] = np.conj(v)
    return rho


def zero_pattern(rho: np.ndarray, tol: float = 1e-12) -> list[tuple[int, int]]:
    """Upper-triangle off-diagonal positions (1-based) whose entries vanish."""
    return [
        (i + 1, j + 1)
        for i in range(4)
        for j in range(i + 1, 4)
        if abs(rho[i, j]) <= tol
    ]
