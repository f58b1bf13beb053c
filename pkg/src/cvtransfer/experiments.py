"""Scenario sweeps, peak tables and the detuning / timing / delayed-injection scans."""
from __future__ import annotations

import csv
import functools
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cv_states import (
    DEFAULT_MAX_N,
    DEFAULT_TAIL_EPS,
    CVStateSpec,
    Family,
    coefficients,
    mean_photons,
    photon_distribution,
)
from .errors import CVTransferError, DomainError
from .ent_measures import report_batch
from .jc_core import ArmParams, QubitPrep
from .reduced_state import reduced_density_batch

AXIS_NAMES = (
    "g_tau",
    "g_tau_a",
    "g_tau_b",
    "delta_tau",
    "delta_tau_a",
    "delta_tau_b",
    "mean_n",
    "p00",
    "x",
    "b1_sq",
)
STATE_AXES = ("mean_n", "p00", "x")

# axes that write to the same underlying field
_OVERLAPS = {
    "g_tau": {"g_tau_a", "g_tau_b"},
    "delta_tau": {"delta_tau_a", "delta_tau_b"},
}

CSV_COLUMNS = (
    "family",
    "P00_or_x",
    "mean_N",
    "g_tau_A",
    "g_tau_B",
    "delta_tau_A",
    "delta_tau_B",
    "A1",
    "A2",
    "B1",
    "B2",
    "eof",
    "concurrence",
    "lambda4_pt",
    "x_form",
    "n_max",
    "trace_err",
    "error",
)


@dataclass(frozen=True)
class Axis:
    """One swept dimension: a name from :data:`AXIS_NAMES` and its grid values."""

    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise DomainError(f"unknown axis {self.name!r}; choose from {AXIS_NAMES}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise DomainError(f"axis {self.name!r} has no values")
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"axis {self.name!r} has non-finite values")
        object.__setattr__(self, "values", vals)

    @classmethod
    def linspace(cls, name: str, lo: float, hi: float, steps: int) -> "Axis":
        if steps < 2:
            raise DomainError("a linear axis needs at least 2 steps")
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError("axis bounds must be finite")
        return cls(name, tuple(np.linspace(lo, hi, steps)))

    @property
    def lo(self) -> float:
        return min(self.values)

    @property
    def hi(self) -> float:
        return max(self.values)

    def __len__(self):
        return len(self.values)


DEFAULT_GTAU_AXIS = Axis.linspace("g_tau", 0.0, 12.0, 600)
DEFAULT_MEAN_N_AXIS = Axis.linspace("mean_n", 0.02, 4.0, 200)
DEFAULT_TSS_GTAU_AXIS = Axis.linspace("g_tau", 0.0, 4 * math.pi, 600)
DEFAULT_P00_AXIS = Axis.linspace("p00", 0.0, 1.0, 201)


@dataclass(frozen=True)
class PointInputs:
    """Fully resolved inputs of one evaluation."""

    state: CVStateSpec
    prep_a: QubitPrep
    prep_b: QubitPrep
    arm_a: ArmParams
    arm_b: ArmParams


@dataclass(frozen=True)
class Scenario:
    """A family of evaluations: fixed settings plus up to two swept axes.

    ``state_param`` names how ``state_value`` is read when the state is not
    swept: ``"mean_n"``, ``"p00"`` (TSS only) or ``"x"`` (TWB/TMC).
    ``b1_phase`` is the relative phase of qubit B's excited amplitude when the
    ``b1_sq`` axis is swept.
    """

    family: Family
    state_value: float = 0.0
    state_param: str = "mean_n"
    prep_a: QubitPrep = field(default_factory=QubitPrep.ground)
    prep_b: QubitPrep = field(default_factory=QubitPrep.ground)
    arm_a: ArmParams = ArmParams(0.0)
    arm_b: ArmParams = ArmParams(0.0)
    axes: tuple = ()
    tail_eps: float = DEFAULT_TAIL_EPS
    max_n: int = DEFAULT_MAX_N
    b1_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "axes", tuple(self.axes))
        if self.state_param not in STATE_AXES:
            raise DomainError(f"state_param must be one of {STATE_AXES}")
        if len(self.axes) > 2:
            raise DomainError("a scenario sweeps at most two axes")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise DomainError(f"swept axes must be distinct, got {names}")
        for n in names:
            if _OVERLAPS.get(n, set()) & set(names):
                raise DomainError(f"axis {n!r} overlaps with {sorted(_OVERLAPS[n] & set(names))}")
        if sum(n in STATE_AXES for n in names) > 1:
            raise DomainError("only one state axis may be swept")

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    def grid(self) -> Iterable[dict]:
        """Coordinate dicts in row-major order (first axis outermost)."""
        for combo in itertools.product(*(a.values for a in self.axes)):
            yield dict(zip((a.name for a in self.axes), combo))

    def resolve(self, coords: dict | None = None) -> PointInputs:
        coords = coords or {}
        state_param, state_value = self.state_param, self.state_value
        for name in STATE_AXES:
            if name in coords:
                state_param, state_value = name, coords[name]
        state = make_state(self.family, state_param, state_value, self.tail_eps, self.max_n)

        ga, gb = self.arm_a.g_tau, self.arm_b.g_tau
        da, db = self.arm_a.delta_tau, self.arm_b.delta_tau
        if "g_tau" in coords:
            ga = gb = coords["g_tau"]
        ga = coords.get("g_tau_a", ga)
        gb = coords.get("g_tau_b", gb)
        if "delta_tau" in coords:
            da = db = coords["delta_tau"]
        da = coords.get("delta_tau_a", da)
        db = coords.get("delta_tau_b", db)
        prep_b = self.prep_b
        if "b1_sq" in coords:
            prep_b = QubitPrep.superposition(coords["b1_sq"], self.b1_phase)
        return PointInputs(state, self.prep_a, prep_b, ArmParams(ga, da), ArmParams(gb, db))


def make_state(family, param: str, value: float, tail_eps=DEFAULT_TAIL_EPS, max_n=DEFAULT_MAX_N) -> CVStateSpec:
    """Build a state spec from one of the supported parametrisations."""
    return _make_state(Family.parse(family), param, float(value), float(tail_eps), int(max_n))


# grids revisit the same state many times and the TMC inversion is a bisection
@functools.lru_cache(maxsize=4096)
def _make_state(family, param, value, tail_eps, max_n) -> CVStateSpec:
    family = Family.parse(family)
    kw = dict(tail_eps=tail_eps, max_n=max_n)
    if param == "mean_n":
        return CVStateSpec.from_mean(family, value, **kw)
    if param == "p00":
        if family is not Family.TSS:
            raise DomainError("the p00 parametrisation applies to TSS only")
        return CVStateSpec.tss(value, **kw)
    if param == "x":
        if family is Family.TSS:
            raise DomainError("TSS is parametrised by p00, not x")
        return CVStateSpec(family, x=value, **kw)
    raise DomainError(f"unknown state parametrisation {param!r}")


@dataclass(frozen=True)
class SweepRecord:
    family: str
    state_value: float
    mean_n: float
    g_tau_a: float
    g_tau_b: float
    delta_tau_a: float
    delta_tau_b: float
    a1: complex
    a2: complex
    b1: complex
    b2: complex
    eof: float = math.nan
    concurrence: float = math.nan
    lambda4_pt: float = math.nan
    x_form: bool | None = None
    n_max: int | None = None
    trace_err: float = math.nan
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


@functools.lru_cache(maxsize=4096)
def _cached_mean(spec: CVStateSpec) -> float:
    return mean_photons(spec)


def _base_fields(inp: PointInputs) -> dict:
    s = inp.state
    return dict(
        family=s.family.value,
        state_value=s.label_value,
        mean_n=_cached_mean(s),
        g_tau_a=inp.arm_a.g_tau,
        g_tau_b=inp.arm_b.g_tau,
        delta_tau_a=inp.arm_a.delta_tau,
        delta_tau_b=inp.arm_b.delta_tau,
        a1=complex(inp.prep_a.ground_amp),
        a2=complex(inp.prep_a.excited_amp),
        b1=complex(inp.prep_b.ground_amp),
        b2=complex(inp.prep_b.excited_amp),
    )


def _error_record(inp, exc: Exception, family: str = "") -> SweepRecord:
    msg = f"{type(exc).__name__}: {exc}"
    if inp is None:
        nan = math.nan
        return SweepRecord(family, nan, nan, nan, nan, nan, nan, 0j, 0j, 0j, 0j, error=msg)
    try:
        base = _base_fields(inp)
    except CVTransferError:
        nan = math.nan
        base = dict(family=family, state_value=nan, mean_n=nan, g_tau_a=inp.arm_a.g_tau,
                    g_tau_b=inp.arm_b.g_tau, delta_tau_a=inp.arm_a.delta_tau,
                    delta_tau_b=inp.arm_b.delta_tau, a1=0j, a2=0j, b1=0j, b2=0j)
    return SweepRecord(**base, error=msg)


def evaluate_points(points: Sequence) -> list[SweepRecord]:
    """Evaluate resolved inputs (or exceptions raised while resolving them).

    Points sharing a truncation length are batched together; each point's
    numerics do not depend on which other points share its batch.
    """
    records: list = [None] * len(points)
    coeff_cache: dict = {}
    groups: dict = {}
    for i, inp in enumerate(points):
        if isinstance(inp, Exception):
            records[i] = _error_record(None, inp)
            continue
        try:
            co = coeff_cache.get(inp.state)
            if co is None:
                co = coeff_cache[inp.state] = coefficients(inp.state)
        except CVTransferError as exc:
            records[i] = _error_record(inp, exc)
            continue
        groups.setdefault(len(co.c), []).append((i, inp, co))

    for members in groups.values():
        idx = [m[0] for m in members]
        inps = [m[1] for m in members]
        c = np.stack([m[2].c for m in members])
        try:
            rho = reduced_density_batch(
                c,
                (np.array([p.prep_a.ground_amp for p in inps]), np.array([p.prep_a.excited_amp for p in inps])),
                (np.array([p.prep_b.ground_amp for p in inps]), np.array([p.prep_b.excited_amp for p in inps])),
                np.array([p.arm_a.g_tau for p in inps]),
                np.array([p.arm_a.delta_tau for p in inps]),
                np.array([p.arm_b.g_tau for p in inps]),
                np.array([p.arm_b.delta_tau for p in inps]),
            )
            rep = report_batch(rho)
        except (CVTransferError, np.linalg.LinAlgError):
            # isolate the failing points
            for i, inp in zip(idx, inps):
                records[i] = run_point(inp)
            continue
        trace = np.real(np.trace(rho, axis1=1, axis2=2))
        for j, (i, inp, co) in enumerate(members):
            records[i] = SweepRecord(
                **_base_fields(inp),
                eof=float(rep["eof"][j]),
                concurrence=float(rep["concurrence"][j]),
                lambda4_pt=float(rep["lambda4"][j]),
                x_form=bool(rep["x_form"][j]),
                n_max=co.n_max,
                trace_err=float(abs(trace[j] - 1)),
            )
    return records


def run_point(inp: PointInputs) -> SweepRecord:
    """Evaluate one fully specified configuration.

    Failures are captured in the record's ``error`` field.
    """
    try:
        co = coefficients(inp.state)
        rho = reduced_density_batch(
            co.c[None, :],
            (inp.prep_a.ground_amp, inp.prep_a.excited_amp),
            (inp.prep_b.ground_amp, inp.prep_b.excited_amp),
            inp.arm_a.g_tau,
            inp.arm_a.delta_tau,
            inp.arm_b.g_tau,
            inp.arm_b.delta_tau,
        )
        rep = report_batch(rho)
    except (CVTransferError, np.linalg.LinAlgError) as exc:
        return _error_record(inp, exc)
    return SweepRecord(
        **_base_fields(inp),
        eof=float(rep["eof"][0]),
        concurrence=float(rep["concurrence"][0]),
        lambda4_pt=float(rep["lambda4"][0]),
        x_form=bool(rep["x_form"][0]),
        n_max=co.n_max,
        trace_err=float(abs(np.real(np.trace(rho[0])) - 1)),
    )


def _resolve_all(scenario: Scenario) -> list:
    out = []
    for coords in scenario.grid():
        try:
            out.append(scenario.resolve(coords))
        except CVTransferError as exc:
            out.append(exc)
    return out


def sweep(scenario: Scenario) -> list[SweepRecord]:
    """Evaluate every grid point of ``scenario`` in row-major order."""
    return evaluate_points(_resolve_all(scenario))


def eof_grid(table: Sequence[SweepRecord], scenario: Scenario) -> np.ndarray:
    """Entanglement of formation reshaped to the scenario grid (NaN on errors)."""
    vals = np.array([r.eof if r.ok else math.nan for r in table], dtype=float)
    return vals.reshape(scenario.shape)


# ---------------------------------------------------------------------------
# peak refinement

_INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f, a: float, b: float, tol: float = 1e-3) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    a, b = min(a, b), max(a, b)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


@dataclass(frozen=True)
class PeakRow:
    """A refined local maximum of the entanglement map."""

    g_tau_max: float
    state_max: float
    eof_max: float
    p00: float
    p11: float
    coords: dict
    coarse_eof: float
    state_param: str = "mean_n"


def _axis_step(axis: Axis, i: int) -> float:
    v = axis.values
    gaps = []
    if i > 0:
        gaps.append(abs(v[i] - v[i - 1]))
    if i < len(v) - 1:
        gaps.append(abs(v[i + 1] - v[i]))
    return max(gaps) if gaps else 0.0


def _local_maxima(grid: np.ndarray, floor: float = 1e-12) -> list[tuple[int, int]]:
    g = np.where(np.isnan(grid), -np.inf, grid)
    padded = np.pad(g, 1, constant_values=-np.inf)
    centre = padded[1:-1, 1:-1]
    is_max = (
        (centre > floor)
        & (centre >= padded[:-2, 1:-1])
        & (centre >= padded[2:, 1:-1])
        & (centre >= padded[1:-1, :-2])
        & (centre >= padded[1:-1, 2:])
    )
    cells = [tuple(int(v) for v in ij) for ij in np.argwhere(is_max)]
    return sorted(cells, key=lambda ij: (-g[ij], ij))


def refine_peaks(
    table: Sequence[SweepRecord],
    scenario: Scenario,
    top_k: int = 4,
    rounds: int = 3,
    tol: float = 1e-3,
) -> list[PeakRow]:
    """Locate grid-local maxima of a 2-D map and polish the best ``top_k``.

    Each candidate is refined by coordinate ascent: golden-section line
    searches alternate between the two axes, each bracketed by one grid step
    around the current point. Rows come back sorted by the first axis.
    """
    if len(scenario.axes) != 2:
        raise DomainError("peak refinement needs a two-axis sweep")
    grid = eof_grid(table, scenario)
    ax0, ax1 = scenario.axes

    def objective(coords):
        try:
            rec = run_point(scenario.resolve(coords))
        except CVTransferError:
            return -math.inf
        return rec.eof if rec.ok else -math.inf

    accepted: list[PeakRow] = []
    for i, j in _local_maxima(grid):
        if len(accepted) >= top_k:
            break
        step0, step1 = _axis_step(ax0, i), _axis_step(ax1, j)
        pos = {ax0.name: ax0.values[i], ax1.name: ax1.values[j]}
        if any(
            abs(p.coords[ax0.name] - pos[ax0.name]) <= 1.5 * step0
            and abs(p.coords[ax1.name] - pos[ax1.name]) <= 1.5 * step1
            for p in accepted
        ):
            continue
        best = float(grid[i, j])
        for _ in range(rounds):
            moved = 0.0
            for axis, step in ((ax0, step0), (ax1, step1)):
                lo = max(axis.lo, pos[axis.name] - step)
                hi = min(axis.hi, pos[axis.name] + step)
                if hi - lo <= tol:
                    continue

                def line(v, name=axis.name):
                    return objective({**pos, name: v})

                x, fx = golden_section_max(line, lo, hi, tol)
                if fx >= best:
                    moved = max(moved, abs(x - pos[axis.name]))
                    pos[axis.name], best = x, fx
            if moved < tol:
                break
        if any(
            abs(p.coords[ax0.name] - pos[ax0.name]) <= step0
            and abs(p.coords[ax1.name] - pos[ax1.name]) <= step1
            for p in accepted
        ):
            continue
        inp = scenario.resolve(pos)
        probs = photon_distribution(coefficients(inp.state))
        state_axis = next((a.name for a in (ax0, ax1) if a.name in STATE_AXES), scenario.state_param)
        accepted.append(
            PeakRow(
                g_tau_max=inp.arm_a.g_tau,
                state_max=pos.get(state_axis, scenario.state_value),
                eof_max=best,
                p00=float(probs[0]),
                p11=float(probs[1]) if len(probs) > 1 else 0.0,
                coords=dict(pos),
                coarse_eof=float(grid[i, j]),
                state_param=state_axis,
            )
        )
    return sorted(accepted, key=lambda p: p.coords[ax0.name])


def resonance_map(family, prep_a: QubitPrep | None = None, prep_b: QubitPrep | None = None,
                  g_axis: Axis | None = None, state_axis: Axis | None = None, **kw) -> Scenario:
    """Equal-arm resonant map over coupling time and state parameter."""
    family = Family.parse(family)
    if g_axis is None:
        g_axis = DEFAULT_TSS_GTAU_AXIS if family is Family.TSS else DEFAULT_GTAU_AXIS
    if state_axis is None:
        state_axis = DEFAULT_P00_AXIS if family is Family.TSS else DEFAULT_MEAN_N_AXIS
    return Scenario(
        family,
        state_param=state_axis.name,
        prep_a=prep_a or QubitPrep.ground(),
        prep_b=prep_b or QubitPrep.ground(),
        axes=(g_axis, state_axis),
        **kw,
    )


# ---------------------------------------------------------------------------
# scans

def _n_axis(n_values) -> Axis:
    if n_values is None:
        return DEFAULT_MEAN_N_AXIS
    if isinstance(n_values, Axis):
        return n_values
    return Axis("mean_n", tuple(n_values))


def detuning_scenario(family, g_tau: float, mode: str = "B_only", delta_values=(0, 1, 2, 3, 4, 5),
                      n_values=None, **kw) -> Scenario:
    """Curves over mean photon number, one per detuning value, both qubits ground.

    ``mode="B_only"`` detunes qubit B only; ``"both_equal"`` detunes both arms.
    """
    axis_name = {"B_only": "delta_tau_b", "both_equal": "delta_tau"}.get(mode)
    if axis_name is None:
        raise DomainError(f"unknown detuning mode {mode!r}")
    return Scenario(family, arm_a=ArmParams(g_tau), arm_b=ArmParams(g_tau),
                    axes=(Axis(axis_name, tuple(delta_values)), _n_axis(n_values)), **kw)


def mismatch_scenario(family, g_tau_a: float, g_tau_b_values, n_values=None, **kw) -> Scenario:
    """Resonant curves for different coupling times of qubit B."""
    return Scenario(family, arm_a=ArmParams(g_tau_a), arm_b=ArmParams(g_tau_a),
                    axes=(Axis("g_tau_b", tuple(g_tau_b_values)), _n_axis(n_values)), **kw)


def delayed_injection_scenario(family, g_tau: float, b1_sq_values=(0, 0.25, 0.5, 0.75, 1), n_values=None,
                               b1_phase: float = 0.0, **kw) -> Scenario:
    """Qubit A ground, qubit B already in ``sqrt(b1_sq)|g> + e^{i b1_phase} sqrt(1-b1_sq)|e>``."""
    return Scenario(family, arm_a=ArmParams(g_tau), arm_b=ArmParams(g_tau), b1_phase=b1_phase,
                    axes=(Axis("b1_sq", tuple(b1_sq_values)), _n_axis(n_values)), **kw)


def detuning_scan(family, g_tau: float, mode: str = "B_only", delta_values=(0, 1, 2, 3, 4, 5),
                  n_values=None, **kw) -> tuple[Scenario, list[SweepRecord]]:
    """Evaluate :func:`detuning_scenario`; returns the scenario and its table."""
    sc = detuning_scenario(family, g_tau, mode, delta_values, n_values, **kw)
    return sc, sweep(sc)


def mismatch_scan(family, g_tau_a: float, g_tau_b_values, n_values=None,
                  **kw) -> tuple[Scenario, list[SweepRecord]]:
    """Evaluate :func:`mismatch_scenario`."""
    sc = mismatch_scenario(family, g_tau_a, g_tau_b_values, n_values, **kw)
    return sc, sweep(sc)


def delayed_injection_scan(family, g_tau: float, b1_sq_values=(0, 0.25, 0.5, 0.75, 1), n_values=None,
                           b1_phase: float = 0.0, **kw) -> tuple[Scenario, list[SweepRecord]]:
    """Evaluate :func:`delayed_injection_scenario`."""
    sc = delayed_injection_scenario(family, g_tau, b1_sq_values, n_values, b1_phase, **kw)
    return sc, sweep(sc)


def curve_maxima(table: Sequence[SweepRecord], scenario: Scenario) -> dict:
    """Maximum eof along the second axis for each value of the first."""
    grid = eof_grid(table, scenario)
    return {v: float(np.nanmax(row)) for v, row in zip(scenario.axes[0].values, grid)}


# ---------------------------------------------------------------------------
# CSV output

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, complex):
        if v.imag == 0:
            return _fmt(v.real)
        return f"{v.real:.17g}{v.imag:+.17g}j"
    v = float(v)
    if math.isnan(v):
        return ""
    return f"{v:.17g}"


def record_row(r: SweepRecord) -> list[str]:
    return [
        r.family,
        _fmt(r.state_value),
        _fmt(r.mean_n),
        _fmt(r.g_tau_a),
        _fmt(r.g_tau_b),
        _fmt(r.delta_tau_a),
        _fmt(r.delta_tau_b),
        _fmt(r.a1),
        _fmt(r.a2),
        _fmt(r.b1),
        _fmt(r.b2),
        _fmt(r.eof),
        _fmt(r.concurrence),
        _fmt(r.lambda4_pt),
        _fmt(r.x_form),
        _fmt(r.n_max),
        _fmt(r.trace_err),
        r.error,
    ]


def write_csv(table: Iterable[SweepRecord], destination=None) -> str:
    """Serialise records as CSV; also write to ``destination`` (path or text stream) if given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in table:
        w.writerow(record_row(r))
    text = buf.getvalue()
    _emit(text, destination)
    return text


PEAK_COLUMNS = ("g_tau_max", "state_param", "state_max", "eof_max", "P00", "P11")


def write_peaks_csv(rows: Iterable[PeakRow], destination=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PEAK_COLUMNS)
    for p in rows:
        w.writerow([_fmt(p.g_tau_max), p.state_param, _fmt(p.state_max), _fmt(p.eof_max), _fmt(p.p00), _fmt(p.p11)])
    text = buf.getvalue()
    _emit(text, destination)
    return text


def _emit(text: str, destination) -> None:
    if destination is None:
        return
    if hasattr(destination, "write"):
        destination.write(text)
        return
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
