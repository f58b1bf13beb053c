"""Command-line entry point.

Exit codes: 0 on success, 2 on argument or domain errors (nothing is written),
1 on runtime failures. A table whose rows carry per-point errors is still
written in full and the command exits 1.
"""
from __future__ import annotations

import argparse
import math
import sys

from .cv_states import (
    DEFAULT_MAX_N,
    DEFAULT_TAIL_EPS,
    Family,
    coefficients,
    mean_photons,
    photon_distribution,
    von_neumann_entropy,
)
from .errors import CVTransferError, DomainError
from .experiments import (
    DEFAULT_GTAU_AXIS,
    DEFAULT_MEAN_N_AXIS,
    DEFAULT_P00_AXIS,
    DEFAULT_TSS_GTAU_AXIS,
    Axis,
    PointInputs,
    Scenario,
    delayed_injection_scenario,
    detuning_scenario,
    make_state,
    mismatch_scenario,
    refine_peaks,
    resonance_map,
    run_point,
    sweep,
    write_csv,
    write_peaks_csv,
)
from .jc_core import ArmParams, QubitPrep


class UsageError(Exception):
    """Bad flag combination detected after parsing."""


# ---------------------------------------------------------------------------
# flag value parsers

def _prep(text: str) -> QubitPrep:
    t = text.strip().lower()
    if t == "ground":
        return QubitPrep.ground()
    if t == "excited":
        return QubitPrep.excited()
    if t.startswith("super:"):
        try:
            p = float(t[len("super:"):])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad superposition weight in {text!r}") from None
        if not 0 <= p <= 1:
            raise argparse.ArgumentTypeError(f"|B1|^2 must lie in [0, 1], got {p}")
        return QubitPrep.superposition(p)
    raise argparse.ArgumentTypeError(f"prep must be ground, excited or super:<b1_sq>, got {text!r}")


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"value must be finite, got {text!r}")
    return v


def _float_list(text: str) -> tuple:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers")
    return tuple(_finite(p) for p in parts)


def _grid(text: str) -> tuple:
    """``lo:hi:steps``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:steps, got {text!r}")
    lo, hi = _finite(parts[0]), _finite(parts[1])
    try:
        steps = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid steps must be an integer, got {parts[2]!r}") from None
    if steps < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 steps")
    return lo, hi, steps


def _family(text: str) -> Family:
    try:
        return Family.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# ---------------------------------------------------------------------------
# parser

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", type=_family, required=True, help="tss, twb or tmc")
    p.add_argument("--tail-eps", type=_finite, default=DEFAULT_TAIL_EPS,
                   help=f"Fock truncation tail bound (default {DEFAULT_TAIL_EPS:g})")
    p.add_argument("--max-n", type=int, default=DEFAULT_MAX_N,
                   help=f"truncation cap (default {DEFAULT_MAX_N})")
    p.add_argument("--out", default=None, help="output file (default standard output)")


def _state_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--p00", type=_finite, help="vacuum probability (tss)")
    g.add_argument("--x", type=_finite, help="family parameter (twb, tmc)")
    g.add_argument("--mean-n", type=_finite, help="total mean photon number")


def _prep_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prep-a", type=_prep, default=QubitPrep.ground(),
                   help="qubit A: ground, excited or super:<b1_sq> (default ground)")
    p.add_argument("--prep-b", type=_prep, default=QubitPrep.ground(),
                   help="qubit B: ground, excited or super:<b1_sq> (default ground)")


def _n_grid_flag(p: argparse.ArgumentParser) -> None:
    a = DEFAULT_MEAN_N_AXIS
    p.add_argument("--n-grid", type=_grid, default=None,
                   help=f"mean photon number grid lo:hi:steps (default {a.lo:g}:{a.hi:g}:{len(a)})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvtransfer",
        description="Entanglement transfer from two-mode fields to two qubits via Jaynes-Cummings coupling.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("state", help="photon statistics and entropy of a field state")
    _common(p)
    _state_flags(p)

    p = sub.add_parser("point", help="evaluate one configuration")
    _common(p)
    _state_flags(p)
    _prep_flags(p)
    p.add_argument("--gtau", type=_finite, help="coupling time for both arms")
    p.add_argument("--gtau-a", type=_finite, help="coupling time of arm A")
    p.add_argument("--gtau-b", type=_finite, help="coupling time of arm B")
    p.add_argument("--delta-tau-a", type=_finite, default=0.0, help="detuning time of arm A (default 0)")
    p.add_argument("--delta-tau-b", type=_finite, default=0.0, help="detuning time of arm B (default 0)")

    for name, help_text in (("sweep", "resonance map over coupling time and state"),
                            ("peaks", "refined local maxima of the resonance map")):
        p = sub.add_parser(name, help=help_text)
        _common(p)
        _prep_flags(p)
        p.add_argument("--gtau-grid", type=_grid, default=None,
                       help="coupling-time grid lo:hi:steps (default 0:12:600, 0:4pi:600 for tss)")
        p.add_argument("--state-axis", choices=("mean_n", "p00", "x"), default=None,
                       help="state parametrisation swept (default mean_n, p00 for tss)")
        p.add_argument("--state-grid", type=_grid, default=None,
                       help="state grid lo:hi:steps (default 0.02:4:200, 0:1:201 for p00)")
        p.add_argument("--delta-tau-a", type=_finite, default=0.0, help="detuning time of arm A (default 0)")
        p.add_argument("--delta-tau-b", type=_finite, default=0.0, help="detuning time of arm B (default 0)")
        if name == "peaks":
            p.add_argument("--top-k", type=int, default=4, help="number of peaks reported (default 4)")

    p = sub.add_parser("scan-detuning", help="peak curves over mean photon number for several detunings")
    _common(p)
    p.add_argument("--gtau", type=_finite, required=True, help="coupling time of both arms")
    p.add_argument("--mode", choices=("B_only", "both_equal"), default="B_only",
                   help="detune arm B only or both arms equally (default B_only)")
    p.add_argument("--deltas", type=_float_list, default=(0, 1, 2, 3, 4, 5),
                   help="comma-separated detuning times (default 0,1,2,3,4,5)")
    _n_grid_flag(p)

    p = sub.add_parser("scan-times", help="curves for mismatched coupling times")
    _common(p)
    p.add_argument("--gtau-a", type=_finite, required=True, help="coupling time of arm A")
    p.add_argument("--gtau-b-values", type=_float_list, required=True,
                   help="comma-separated coupling times of arm B")
    _n_grid_flag(p)

    p = sub.add_parser("scan-delayed", help="qubit B injected in a superposition")
    _common(p)
    p.add_argument("--gtau", type=_finite, required=True, help="coupling time of both arms")
    p.add_argument("--b1sq-values", type=_float_list, default=(0, 0.25, 0.5, 0.75, 1),
                   help="comma-separated ground-state weights of qubit B (default 0,0.25,0.5,0.75,1)")
    p.add_argument("--b1-phase", type=_finite, default=0.0,
                   help="phase of qubit B's excited amplitude (default 0)")
    _n_grid_flag(p)
    parser.set_defaults(_subparsers=sub.choices)
    return parser


# ---------------------------------------------------------------------------
# commands

def _state_from_args(args):
    if args.p00 is not None:
        return make_state(args.family, "p00", args.p00, args.tail_eps, args.max_n)
    if args.x is not None:
        return make_state(args.family, "x", args.x, args.tail_eps, args.max_n)
    return make_state(args.family, "mean_n", args.mean_n, args.tail_eps, args.max_n)


def _write_text(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cmd_state(args) -> int:
    spec = _state_from_args(args)
    co = coefficients(spec)
    probs = photon_distribution(co)
    lines = [
        f"family={spec.family.value}",
        f"x={abs(complex(spec.x)):.17g}" if spec.family is not Family.TSS else f"p00={spec.p00:.17g}",
        f"mean_N={mean_photons(spec):.17g}",
        f"S_vn={von_neumann_entropy(co):.17g}",
        f"n_max={co.n_max}",
        f"tail={co.tail_bound:.17g}",
    ]
    lines += [f"P_{n}{n}={p:.17g}" for n, p in enumerate(probs)]
    _write_text("\n".join(lines) + "\n", args.out)
    return 0


def _arms_from_point_args(args) -> tuple[ArmParams, ArmParams]:
    if args.gtau is not None:
        if args.gtau_a is not None or args.gtau_b is not None:
            raise UsageError("--gtau cannot be combined with --gtau-a/--gtau-b")
        ga = gb = args.gtau
    else:
        if args.gtau_a is None or args.gtau_b is None:
            raise UsageError("give --gtau, or both --gtau-a and --gtau-b")
        ga, gb = args.gtau_a, args.gtau_b
    return ArmParams(ga, args.delta_tau_a), ArmParams(gb, args.delta_tau_b)


def _cmd_point(args) -> int:
    arm_a, arm_b = _arms_from_point_args(args)
    inp = PointInputs(_state_from_args(args), args.prep_a, args.prep_b, arm_a, arm_b)
    rec = run_point(inp)
    _write_text(write_csv([rec]), args.out)
    return 0 if rec.ok else 1


def _map_scenario(args) -> Scenario:
    family = args.family
    if args.gtau_grid is None:
        g_axis = DEFAULT_TSS_GTAU_AXIS if family is Family.TSS else DEFAULT_GTAU_AXIS
    else:
        g_axis = Axis.linspace("g_tau", *args.gtau_grid)
    state_name = args.state_axis or ("p00" if family is Family.TSS else "mean_n")
    if args.state_grid is None:
        if state_name == "p00":
            s_axis = DEFAULT_P00_AXIS
        elif state_name == "mean_n":
            s_axis = DEFAULT_MEAN_N_AXIS
        else:
            raise UsageError("--state-axis x needs an explicit --state-grid")
    else:
        s_axis = Axis.linspace(state_name, *args.state_grid)
    return resonance_map(
        family, args.prep_a, args.prep_b, g_axis, s_axis,
        arm_a=ArmParams(0.0, args.delta_tau_a), arm_b=ArmParams(0.0, args.delta_tau_b),
        tail_eps=args.tail_eps, max_n=args.max_n,
    )


def _validate(scenario: Scenario) -> None:
    # resolve every point up front so bad physical input fails before any output
    for coords in scenario.grid():
        scenario.resolve(coords)


def _finish_table(table, out) -> int:
    _write_text(write_csv(table), out)
    return 0 if all(r.ok for r in table) else 1


def _cmd_sweep(args) -> int:
    return _run_table(_map_scenario(args), args.out)


def _cmd_peaks(args) -> int:
    if args.top_k < 1:
        raise UsageError("--top-k must be at least 1")
    sc = _map_scenario(args)
    _validate(sc)
    table = sweep(sc)
    rows = refine_peaks(table, sc, top_k=args.top_k)
    _write_text(write_peaks_csv(rows), args.out)
    return 0 if all(r.ok for r in table) else 1


def _n_axis_from_args(args):
    if args.n_grid is None:
        return DEFAULT_MEAN_N_AXIS
    return Axis.linspace("mean_n", *args.n_grid)


def _kw(args) -> dict:
    return dict(n_values=_n_axis_from_args(args), tail_eps=args.tail_eps, max_n=args.max_n)


def _run_table(sc: Scenario, out) -> int:
    _validate(sc)
    return _finish_table(sweep(sc), out)


def _cmd_scan_detuning(args) -> int:
    sc = detuning_scenario(args.family, args.gtau, args.mode, args.deltas, **_kw(args))
    return _run_table(sc, args.out)


def _cmd_scan_times(args) -> int:
    sc = mismatch_scenario(args.family, args.gtau_a, args.gtau_b_values, **_kw(args))
    return _run_table(sc, args.out)


def _cmd_scan_delayed(args) -> int:
    sc = delayed_injection_scenario(args.family, args.gtau, args.b1sq_values,
                                    b1_phase=args.b1_phase, **_kw(args))
    return _run_table(sc, args.out)


_COMMANDS = {
    "state": _cmd_state,
    "point": _cmd_point,
    "sweep": _cmd_sweep,
    "peaks": _cmd_peaks,
    "scan-detuning": _cmd_scan_detuning,
    "scan-times": _cmd_scan_times,
    "scan-delayed": _cmd_scan_delayed,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, DomainError) as exc:
        args._subparsers[args.command].print_usage(sys.stderr)
        print(f"cvtransfer {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (CVTransferError, ArithmeticError, OSError) as exc:
        print(f"cvtransfer {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
