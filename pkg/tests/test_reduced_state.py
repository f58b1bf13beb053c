import math

import numpy as np
import pytest

from cvtransfer.cv_states import CVStateSpec, FockCoefficients, coefficients
from cvtransfer.ent_measures import report
from cvtransfer.jc_core import ArmParams, Level, QubitPrep
from cvtransfer.reduced_state import (
    closed_form_elements,
    evolve_joint,
    reduce_to_qubits,
    reduced_density_batch,
    zero_pattern,
)

E, G = Level.EXCITED, Level.GROUND
BASIS_PREPS = {"ground": QubitPrep.ground(), "excited": QubitPrep.excited()}
BELL = CVStateSpec.tss(0.5)


def _batch(co, pa, pb, arm_a, arm_b):
    return reduced_density_batch(
        co.c[None, :],
        (pa.ground_amp, pa.excited_amp),
        (pb.ground_amp, pb.excited_amp),
        arm_a.g_tau, arm_a.delta_tau, arm_b.g_tau, arm_b.delta_tau,
    )[0]


def _random_case(rng, basis_only=True):
    fam = rng.choice(["twb", "tmc", "tss"])
    if fam == "tss":
        spec = CVStateSpec.tss(rng.uniform())
    else:
        spec = CVStateSpec.from_mean(fam, rng.uniform(0.05, 4.0))
    if basis_only:
        pa, pb = (BASIS_PREPS[rng.choice(["ground", "excited"])] for _ in range(2))
    else:
        pa = QubitPrep.superposition(rng.uniform(), rng.uniform(-math.pi, math.pi))
        pb = QubitPrep.superposition(rng.uniform(), rng.uniform(-math.pi, math.pi))
    arm_a = ArmParams(rng.uniform(0, 12), rng.uniform(-5, 5))
    arm_b = ArmParams(rng.uniform(0, 12), rng.uniform(-5, 5))
    return coefficients(spec), pa, pb, arm_a, arm_b


def test_vacuum_joint_state():
    co = coefficients(CVStateSpec.twb(0.0))
    joint = evolve_joint(co, QubitPrep.ground(), QubitPrep.ground(), ArmParams(2.0), ArmParams(3.0))
    assert dict(joint) == {(G, 0, G, 0): 1.0}
    np.testing.assert_array_equal(reduce_to_qubits(joint), np.diag([0, 0, 0, 1]).astype(complex))


def test_bell_joint_state_after_rabi_flop():
    arm = ArmParams(math.pi / 2)
    joint = evolve_joint(coefficients(BELL), QubitPrep.ground(), QubitPrep.ground(), arm, arm)
    assert joint[(G, 0, G, 0)] == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert joint[(E, 0, E, 0)] == pytest.approx(-1 / math.sqrt(2), abs=1e-15)
    for key, amp in joint.items():
        if key not in ((G, 0, G, 0), (E, 0, E, 0)):
            assert abs(amp) < 1e-15
    rho = reduce_to_qubits(joint)
    expected = np.zeros((4, 4), complex)
    expected[0, 0] = expected[3, 3] = 0.5
    expected[0, 3] = expected[3, 0] = -0.5
    np.testing.assert_allclose(rho, expected, atol=1e-15)


def test_untouched_field_gives_product_state():
    co = coefficients(BELL)
    joint = evolve_joint(co, QubitPrep.ground(), QubitPrep.excited(), ArmParams(0.0), ArmParams(0.0))
    rho = reduce_to_qubits(joint)
    expected = np.zeros((4, 4))
    expected[2, 2] = 1.0  # |g>_A |e>_B
    np.testing.assert_allclose(rho, expected, atol=1e-15)
    assert report(rho).eof == 0.0


def test_peak_point_entanglement():
    co = coefficients(CVStateSpec.from_mean("twb", 1.82))
    arm = ArmParams(4.61)
    rho = reduce_to_qubits(evolve_joint(co, QubitPrep.ground(), QubitPrep.ground(), arm, arm))
    assert report(rho).eof == pytest.approx(0.81, abs=0.01)


def test_three_routes_agree_for_basis_preps():
    rng = np.random.default_rng(17)
    for _ in range(50):
        co, pa, pb, arm_a, arm_b = _random_case(rng)
        ref = reduce_to_qubits(evolve_joint(co, pa, pb, arm_a, arm_b))
        np.testing.assert_allclose(_batch(co, pa, pb, arm_a, arm_b), ref, atol=1e-12)
        np.testing.assert_allclose(closed_form_elements(co, pa, pb, arm_a, arm_b), ref, atol=1e-10)


def test_three_routes_agree_for_superpositions():
    rng = np.random.default_rng(23)
    for _ in range(50):
        co, pa, pb, arm_a, arm_b = _random_case(rng, basis_only=False)
        ref = reduce_to_qubits(evolve_joint(co, pa, pb, arm_a, arm_b))
        np.testing.assert_allclose(_batch(co, pa, pb, arm_a, arm_b), ref, atol=1e-12)
        np.testing.assert_allclose(closed_form_elements(co, pa, pb, arm_a, arm_b), ref, atol=1e-10)


def test_complex_field_coefficients_agree():
    co = coefficients(CVStateSpec.tmc(1.1 * np.exp(0.4j)))
    pa = QubitPrep.superposition(0.3, 0.2)
    pb = QubitPrep.superposition(0.6, -1.0)
    arm_a, arm_b = ArmParams(2.2, 0.7), ArmParams(5.1, -1.3)
    ref = reduce_to_qubits(evolve_joint(co, pa, pb, arm_a, arm_b))
    np.testing.assert_allclose(_batch(co, pa, pb, arm_a, arm_b), ref, atol=1e-12)
    np.testing.assert_allclose(closed_form_elements(co, pa, pb, arm_a, arm_b), ref, atol=1e-10)


def test_closed_form_vacuum():
    co = coefficients(CVStateSpec.twb(0.0))
    rho = closed_form_elements(co, QubitPrep.ground(), QubitPrep.ground(), ArmParams(1.0), ArmParams(2.0))
    np.testing.assert_allclose(rho, np.diag([0, 0, 0, 1]), atol=1e-15)


def test_density_invariants_and_trace():
    rng = np.random.default_rng(4)
    for _ in range(40):
        co, pa, pb, arm_a, arm_b = _random_case(rng, basis_only=bool(rng.integers(2)))
        joint = evolve_joint(co, pa, pb, arm_a, arm_b)
        assert joint.norm_sq() == pytest.approx(co.norm_sq, abs=1e-12)
        assert joint.max_photon_number() <= co.n_max + 1
        rho = reduce_to_qubits(joint)
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
        assert np.real(np.trace(rho)) == pytest.approx(co.norm_sq, abs=1e-12)
        assert abs(np.real(np.trace(rho)) - 1) <= 2 * 1e-12
        assert np.linalg.eigvalsh(rho).min() >= -1e-10


def test_truncated_coefficients_trace_matches_norm():
    co = FockCoefficients(np.array([0.6, 0.5, 0.3], dtype=complex), 0.3)
    arm = ArmParams(1.3, 0.4)
    rho = reduce_to_qubits(evolve_joint(co, QubitPrep.excited(), QubitPrep.ground(), arm, arm))
    assert np.real(np.trace(rho)) == pytest.approx(co.norm_sq, abs=1e-15)


@pytest.mark.parametrize("names", [("ground", "ground"), ("excited", "excited"), ("ground", "excited"),
                                   ("excited", "ground")])
def test_x_pattern_for_basis_preps(names):
    rng = np.random.default_rng(9)
    pa, pb = (BASIS_PREPS[n] for n in names)
    for _ in range(20):
        co, _, _, arm_a, arm_b = _random_case(rng)
        rho = reduce_to_qubits(evolve_joint(co, pa, pb, arm_a, arm_b))
        assert set(zero_pattern(rho)) >= {(1, 2), (1, 3), (2, 4), (3, 4), (2, 3)}


def test_delayed_injection_zero_pattern_recorded():
    # A ground, B in a superposition: the coherence between |e g> and |g e> vanishes;
    # nothing else is forced to zero
    co = coefficients(CVStateSpec.from_mean("tmc", 1.0))
    arm = ArmParams(4.66)
    rho = reduce_to_qubits(evolve_joint(co, QubitPrep.ground(), QubitPrep.superposition(0.5), arm, arm))
    assert zero_pattern(rho) == [(2, 3)]
