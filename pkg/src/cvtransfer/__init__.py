"""Entanglement transfer from two-mode continuous-variable fields to two qubits
through independent Jaynes-Cummings interactions."""
from .cv_states import (
    CVStateSpec,
    Family,
    FockCoefficients,
    coefficients,
    mean_photons,
    param_from_mean,
    photon_distribution,
    von_neumann_entropy,
)
from .ent_measures import (
    EntanglementReport,
    concurrence,
    entanglement_of_formation,
    lambda4_tss,
    partial_transpose,
    ppt_eigenvalues,
    report,
)
from .errors import (
    BracketError,
    ContractViolation,
    CVTransferError,
    DomainError,
    NotPSDError,
    TruncationOverflow,
)
from .experiments import (
    Axis,
    PeakRow,
    PointInputs,
    Scenario,
    SweepRecord,
    delayed_injection_scan,
    detuning_scan,
    mismatch_scan,
    refine_peaks,
    resonance_map,
    run_point,
    sweep,
    write_csv,
)
from .jc_core import ArmParams, Level, QubitPrep, evolve_arm_branch, jc_unitary
from .reduced_state import closed_form_elements, evolve_joint, reduce_to_qubits, reduced_density_batch

__version__ = "0.1.0"
