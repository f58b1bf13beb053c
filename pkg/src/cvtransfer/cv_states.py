"""Two-mode field states with a diagonal Fock (Schmidt) expansion.

Three families are supported:

* ``TSS`` -- two-state superposition ``c0|00> + c1|11>``.
* ``TWB`` -- twin beam, ``c_n = sqrt(1 - |x|^2) x^n`` with ``|x| < 1``.
* ``TMC`` -- pair-coherent state, ``c_n = x^n / (n! sqrt(I0(2|x|)))``.

Mean photon numbers always count both modes together.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationOverflow
from .numerics import bessel_i, bisect_increasing

DEFAULT_TAIL_EPS = 1e-12
DEFAULT_MAX_N = 512


class Family(str, enum.Enum):
    TSS = "tss"
    TWB = "twb"
    TMC = "tmc"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown state family {value!r}") from None


@dataclass(frozen=True)
class CVStateSpec:
    """A member of one of the state families plus its truncation policy.

    For TSS the amplitudes ``(c0, c1)`` are stored in ``tss_amps`` and ``x`` is
    unused; for TWB/TMC ``x`` is the (complex) family parameter.
    """

    family: Family
    x: complex = 0.0
    tss_amps: tuple[complex, complex] = (1.0, 0.0)
    tail_eps: float = DEFAULT_TAIL_EPS
    max_n: int = DEFAULT_MAX_N

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if not (0 < self.tail_eps < 1):
            raise DomainError(f"tail_eps must lie in (0, 1), got {self.tail_eps!r}")
        if self.max_n < 1:
            raise DomainError("max_n must be at least 1")
        if not cmath.isfinite(complex(self.x)):
            raise DomainError("state parameter must be finite")
        if self.family is Family.TWB and abs(self.x) >= 1:
            raise DomainError(f"TWB needs |x| < 1, got |x|={abs(self.x)!r}")
        if self.family is Family.TSS:
            c0, c1 = self.tss_amps
            norm = abs(c0) ** 2 + abs(c1) ** 2
            if abs(norm - 1) > 1e-12:
                raise DomainError(f"TSS amplitudes must be normalised, |c0|^2+|c1|^2={norm!r}")

    @classmethod
    def tss(cls, p00: float, **kw) -> "CVStateSpec":
        """Bell-like superposition with real nonnegative amplitudes and ``|c0|^2 = p00``."""
        p00 = float(p00)
        if not 0 <= p00 <= 1:
            raise DomainError(f"P00 must lie in [0, 1], got {p00!r}")
        return cls(Family.TSS, tss_amps=(math.sqrt(p00), math.sqrt(1 - p00)), **kw)

    @classmethod
    def twb(cls, x: complex, **kw) -> "CVStateSpec":
        return cls(Family.TWB, x=x, **kw)

    @classmethod
    def tmc(cls, x: complex, **kw) -> "CVStateSpec":
        return cls(Family.TMC, x=x, **kw)

    @classmethod
    def from_mean(cls, family, mean_n: float, **kw) -> "CVStateSpec":
        """State of the given family with total mean photon number ``mean_n``.

        The parameter is taken real and nonnegative.
        """
        family = Family.parse(family)
        if family is Family.TSS:
            if not 0 <= mean_n <= 2:
                raise DomainError(f"TSS mean photon number must lie in [0, 2], got {mean_n!r}")
            return cls.tss(1 - 0.5 * mean_n, **kw)
        return cls(family, x=param_from_mean(family, mean_n), **kw)

    @property
    def p00(self) -> float:
        """Vacuum probability ``|c_0|^2``."""
        if self.family is Family.TSS:
            return abs(self.tss_amps[0]) ** 2
        r2 = abs(self.x) ** 2
        if self.family is Family.TWB:
            return 1 - r2
        return 1 / bessel_i(0, 2 * abs(self.x))

    @property
    def label_value(self) -> float:
        """P00 for TSS, ``|x|`` otherwise; the value reported in sweep output."""
        return self.p00 if self.family is Family.TSS else abs(self.x)


@dataclass(frozen=True)
class FockCoefficients:
    """Truncated Schmidt coefficients ``c_0..c_Nmax``."""

    c: np.ndarray
    tail_bound: float

    @property
    def n_max(self) -> int:
        return len(self.c) - 1

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.c) ** 2))


def _twb_required_nmax(r2: float, tail_eps: float) -> int:
    # tail after Nmax is r2^(Nmax+1)
    if r2 == 0:
        return 0
    return max(0, math.ceil(math.log(tail_eps) / math.log(r2)) - 1)


def coefficients(spec: CVStateSpec) -> FockCoefficients:
    """Schmidt coefficients, truncated at the first ``Nmax`` whose cumulative
    probability reaches ``1 - tail_eps``.

    Raises
    ------
    TruncationOverflow
        If the required ``Nmax`` exceeds ``spec.max_n``.
    """
    if spec.family is Family.TSS:
        c = np.array(spec.tss_amps, dtype=complex)
        if c[1] == 0:
            c = c[:1]
        tail = max(0.0, 1 - float(np.sum(np.abs(c) ** 2)))
        return FockCoefficients(c, tail)

    x = complex(spec.x)
    r = abs(x)
    if spec.family is Family.TWB:
        needed = _twb_required_nmax(r * r, spec.tail_eps)
        if needed > spec.max_n:
            raise TruncationOverflow(needed, spec.max_n)
        n = np.arange(needed + 1)
        c = math.sqrt(1 - r * r) * x ** n
        # the geometric tail is known in closed form
        tail = (r * r) ** (needed + 1)
        return FockCoefficients(np.asarray(c, dtype=complex), tail)

    c0 = 1 / math.sqrt(bessel_i(0, 2 * r))
    amps = [complex(c0)]
    cum = abs(c0) ** 2
    n = 0
    while cum < 1 - spec.tail_eps:
        n += 1
        if n > spec.max_n:
            # keep counting so the error can name the requirement
            while cum < 1 - spec.tail_eps and n < 100 * spec.max_n:
                amps.append(amps[-1] * x / n)
                cum += abs(amps[-1]) ** 2
                n += 1
            raise TruncationOverflow(n - 1, spec.max_n)
        amps.append(amps[-1] * x / n)
        cum += abs(amps[-1]) ** 2
    return FockCoefficients(np.array(amps, dtype=complex), max(0.0, 1 - cum))


def photon_distribution(coeffs: FockCoefficients) -> np.ndarray:
    """Joint photon-number probabilities ``P_nn = |c_n|^2``."""
    return np.abs(coeffs.c) ** 2


def mean_photons(spec: CVStateSpec) -> float:
    """Total mean photon number of both modes."""
    if spec.family is Family.TSS:
        return 2 * (1 - spec.p00)
    r = abs(spec.x)
    if spec.family is Family.TWB:
        return 2 * r * r / (1 - r * r)
    if r == 0:
        return 0.0
    return 2 * r * bessel_i(1, 2 * r) / bessel_i(0, 2 * r)


def _tmc_mean(r: float) -> float:
    if r == 0:
        return 0.0
    return 2 * r * bessel_i(1, 2 * r) / bessel_i(0, 2 * r)


def param_from_mean(family, target_n: float) -> float:
    """Real ``|x|`` producing total mean photon number ``target_n``."""
    family = Family.parse(family)
    target_n = float(target_n)
    if not target_n >= 0 or not math.isfinite(target_n):
        raise DomainError(f"mean photon number must be finite and >= 0, got {target_n!r}")
    if family is Family.TWB:
        return math.sqrt(target_n / (target_n + 2))
    if family is Family.TSS:
        raise DomainError("TSS is parametrised by P00; use CVStateSpec.from_mean")
    if target_n == 0:
        return 0.0
    hi = 1.0
    while _tmc_mean(hi) < target_n:
        hi *= 2
        if 2 * hi > 60:
            hi = 30.0
            if _tmc_mean(hi) < target_n:
                raise DomainError(f"TMC mean photon number {target_n} is beyond the supported range")
            break
    return bisect_increasing(_tmc_mean, target_n, 0.0, hi, tol=1e-12)


def von_neumann_entropy(coeffs: FockCoefficients) -> float:
    """Entanglement entropy of the two-mode pure state, in bits."""
    p = photon_distribution(coeffs)
    p = p[p > 0]
    # + 0.0 turns -0.0 into 0.0
    return float(-np.sum(p * np.log2(p))) + 0.0


def twb_entropy_closed_form(x: complex) -> float:
    """Entropy of a twin beam from its parameter, without truncation."""
    r2 = abs(x) ** 2
    if r2 == 0:
        return 0.0
    if r2 >= 1:
        raise DomainError("TWB needs |x| < 1")
    return -math.log2(1 - r2) - r2 / (1 - r2) * math.log2(r2)
