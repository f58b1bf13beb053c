"""Off-resonance Jaynes-Cummings propagator for one qubit-mode arm.

Within the excitation variety ``k`` the basis is ``(|e, k>, |g, k+1>)`` and the
evolution over the interaction time is the 2x2 matrix

    U11 = cos(R/2) - i (D/R) sin(R/2)
    U12 = U21 = -i (2 G sqrt(k+1) / R) sin(R/2)
    U22 = cos(R/2) + i (D/R) sin(R/2)

with ``G = g*tau``, ``D = Delta*tau`` and ``R = sqrt(4 G^2 (k+1) + D^2)``.
The state ``|g, 0>`` does not evolve.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_SMALL_R = 1e-8


class Level(str, enum.Enum):
    EXCITED = "excited"
    GROUND = "ground"


@dataclass(frozen=True)
class QubitPrep:
    """Initial qubit state ``ground_amp |g> + excited_amp |e>``."""

    ground_amp: complex
    excited_amp: complex

    def __post_init__(self):
        norm = abs(self.ground_amp) ** 2 + abs(self.excited_amp) ** 2
        if abs(norm - 1) > 1e-12:
            raise DomainError(f"qubit preparation not normalised (norm^2={norm!r})")

    @classmethod
    def ground(cls) -> "QubitPrep":
        return cls(1.0, 0.0)

    @classmethod
    def excited(cls) -> "QubitPrep":
        return cls(0.0, 1.0)

    @classmethod
    def superposition(cls, ground_prob: float, phase: float = 0.0) -> "QubitPrep":
        """``sqrt(p)|g> + e^{i phase} sqrt(1-p)|e>``."""
        if not 0 <= ground_prob <= 1:
            raise DomainError(f"ground-state probability must lie in [0, 1], got {ground_prob!r}")
        return cls(math.sqrt(ground_prob), math.sqrt(1 - ground_prob) * complex(math.cos(phase), math.sin(phase)))

    @property
    def is_basis(self) -> bool:
        return self.ground_amp == 0 or self.excited_amp == 0


@dataclass(frozen=True)
class ArmParams:
    """Dimensionless coupling-time ``g_tau`` and detuning-time ``delta_tau`` of one arm."""

    g_tau: float
    delta_tau: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.g_tau) and math.isfinite(self.delta_tau)):
            raise DomainError("arm parameters must be finite")
        if self.g_tau < 0:
            raise DomainError(f"g_tau must be >= 0, got {self.g_tau!r}")


def rabi(k: int, arm: ArmParams) -> float:
    """Generalised Rabi angle ``R_k * tau`` of variety ``k``."""
    if k < 0:
        raise DomainError("variety index must be >= 0")
    return math.sqrt(4 * arm.g_tau ** 2 * (k + 1) + arm.delta_tau ** 2)


def jc_unitary_table(k, g_tau, delta_tau) -> np.ndarray:
    """Propagators for broadcastable arrays of ``k``, ``g_tau``, ``delta_tau``.

    Returns an array of shape ``broadcast_shape + (2, 2)``.
    """
    k = np.asarray(k, dtype=float)
    g = np.asarray(g_tau, dtype=float)
    d = np.asarray(delta_tau, dtype=float)
    rt = np.sqrt(k + 1)
    r = np.sqrt(4 * g * g * (k + 1) + d * d)
    half = 0.5 * r
    cos = np.cos(half)
    small = r < _SMALL_R
    safe_r = np.where(small, 1.0, r)
    # sin(R/2)/R -> 1/2 as R -> 0
    sinc = np.where(small, 0.5 - r * r / 48, np.sin(half) / safe_r)
    u11 = cos - 1j * d * sinc
    u12 = -2j * g * rt * sinc
    u22 = cos + 1j * d * sinc
    out = np.empty(np.broadcast(k, g, d).shape + (2, 2), dtype=complex)
    out[..., 0, 0] = u11
    out[..., 0, 1] = u12
    out[..., 1, 0] = u12
    out[..., 1, 1] = u22
    return out


def jc_unitary(k: int, arm: ArmParams) -> np.ndarray:
    """2x2 propagator of variety ``k`` acting on ``(|e, k>, |g, k+1>)``."""
    if k < 0:
        raise DomainError("variety index must be >= 0")
    return jc_unitary_table(k, arm.g_tau, arm.delta_tau)


@dataclass(frozen=True)
class ArmBranch:
    """Evolved atom-mode state of one arm started from ``prep (x) |n>``."""

    n: int
    amplitudes: dict

    def __getitem__(self, key) -> complex:
        return self.amplitudes.get(key, 0j)

    def norm_sq(self) -> float:
        return sum(abs(a) ** 2 for a in self.amplitudes.values())


def evolve_arm_branch(prep: QubitPrep, n: int, arm: ArmParams) -> ArmBranch:
    """Evolve ``prep (x) |n>`` through one arm.

    Keys of the result are ``(Level, photon_number)``.
    """
    if n < 0:
        raise DomainError("photon number must be >= 0")
    amps: dict = {}
    if prep.excited_amp != 0:
        u = jc_unitary(n, arm)
        amps[(Level.EXCITED, n)] = prep.excited_amp * u[0, 0]
        amps[(Level.GROUND, n + 1)] = prep.excited_amp * u[1, 0]
    if prep.ground_amp != 0:
        if n == 0:
            amps[(Level.GROUND, 0)] = complex(prep.ground_amp)
        else:
            u = jc_unitary(n - 1, arm)
            amps[(Level.EXCITED, n - 1)] = prep.ground_amp * u[0, 1]
            amps[(Level.GROUND, n)] = prep.ground_amp * u[1, 1]
    return ArmBranch(n, amps)
