import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvtransfer.cv_states import CVStateSpec, coefficients
from cvtransfer.ent_measures import (
    check_density,
    concurrence,
    concurrence_xform,
    entanglement_of_formation,
    is_x_form,
    lambda4_tss,
    partial_transpose,
    ppt_eigenvalues,
    ppt_eigenvalues_xform,
    report,
    report_batch,
)
from cvtransfer.errors import ContractViolation, DomainError
from cvtransfer.jc_core import ArmParams, QubitPrep
from cvtransfer.reduced_state import evolve_joint, reduce_to_qubits


def _bell_transfer():
    rho = np.zeros((4, 4), complex)
    rho[0, 0] = rho[3, 3] = 0.5
    rho[0, 3] = rho[3, 0] = -0.5
    return rho


def _tss_rho(p00, g_tau, case):
    prep = QubitPrep.ground() if case == "ground_ground" else QubitPrep.excited()
    arm = ArmParams(g_tau)
    return reduce_to_qubits(evolve_joint(coefficients(CVStateSpec.tss(p00)), prep, prep, arm, arm))


def _random_state(rng, rank=None):
    rank = rank or int(rng.integers(1, 5))
    a = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def _random_su2(rng):
    q, r = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_ppt_examples():
    np.testing.assert_allclose(ppt_eigenvalues(np.eye(4) / 4), [0.25] * 4, atol=1e-15)
    assert ppt_eigenvalues(_bell_transfer())[0] == pytest.approx(-0.5, abs=1e-15)
    np.testing.assert_allclose(ppt_eigenvalues(np.diag([0, 0, 0, 1.0])), [0, 0, 0, 1], atol=1e-15)


def test_partial_transpose_moves_corner():
    rho = _bell_transfer()
    pt = partial_transpose(rho)
    assert pt[1, 2] == -0.5 and pt[0, 3] == 0
    np.testing.assert_allclose(partial_transpose(pt), rho)


def test_xform_ppt_matches_general():
    rng = np.random.default_rng(12)
    for _ in range(100):
        d = rng.dirichlet(np.ones(4))
        c = rng.uniform() * math.sqrt(d[0] * d[3]) * np.exp(1j * rng.uniform(0, 6))
        rho = np.diag(d).astype(complex)
        rho[0, 3], rho[3, 0] = c, np.conj(c)
        assert is_x_form(rho)
        general = np.linalg.eigvalsh(partial_transpose(rho))
        np.testing.assert_allclose(ppt_eigenvalues_xform(rho), general, atol=1e-14)
        np.testing.assert_allclose(concurrence_xform(rho), concurrence(rho), atol=1e-10)


def test_lambda4_tss_examples():
    assert lambda4_tss(0.5, math.pi / 2, "ground_ground") == pytest.approx(-0.5, abs=1e-15)
    for g in (0.3, 1.7, 5.0):
        assert lambda4_tss(1.0, g, "ground_ground") == 0.0
    assert lambda4_tss(0.5, 26.68, "excited_excited") == pytest.approx(-0.498, abs=1e-3)
    with pytest.raises(DomainError):
        lambda4_tss(1.2, 1.0, "ground_ground")
    with pytest.raises(DomainError):
        lambda4_tss(0.5, 1.0, "mixed")


@pytest.mark.parametrize("case", ["ground_ground", "excited_excited"])
def test_lambda4_tss_matches_numeric(case):
    rng = np.random.default_rng(31)
    for _ in range(200):
        p00, g = rng.uniform(), rng.uniform(0, 4 * math.pi)
        rho = _tss_rho(p00, g, case)
        lam = lambda4_tss(p00, g, case)
        # the formula tracks the eigenvalue of the inner block that can turn negative
        r22, r33 = rho[1, 1].real, rho[2, 2].real
        branch = 0.5 * (r22 + r33 - math.sqrt((r22 - r33) ** 2 + 4 * abs(rho[0, 3]) ** 2))
        assert lam == pytest.approx(branch, abs=1e-10)
        # and it is the smallest one whenever the state is entangled
        numeric = ppt_eigenvalues(rho)[0]
        assert min(lam, 0.0) == pytest.approx(min(numeric, 0.0), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 20))
def test_lambda4_tss_periodic(p00, g):
    assert lambda4_tss(p00, g + math.pi, "ground_ground") == pytest.approx(
        lambda4_tss(p00, g, "ground_ground"), abs=1e-12
    )


def test_concurrence_examples():
    assert concurrence(_bell_transfer()) == pytest.approx(1.0, abs=1e-12)
    assert concurrence(np.eye(4) / 4) == 0.0
    rho = np.diag([0.3, 0.2, 0.2, 0.3]).astype(complex)
    rho[0, 3] = rho[3, 0] = 0.25
    assert concurrence_xform(rho) == pytest.approx(0.1, abs=1e-15)
    assert concurrence(rho) == pytest.approx(0.1, abs=1e-12)


def test_eof_examples():
    assert entanglement_of_formation(0.0) == 0.0
    assert entanglement_of_formation(1.0) == 1.0
    p = (1 + math.sqrt(0.75)) / 2
    h = -p * math.log2(p) - (1 - p) * math.log2(1 - p)
    assert entanglement_of_formation(0.5) == pytest.approx(h, abs=1e-15)
    with pytest.raises(DomainError):
        entanglement_of_formation(1.1)
    with pytest.raises(DomainError):
        entanglement_of_formation(-0.01)
    assert entanglement_of_formation(-1e-13) == 0.0


def test_report_examples():
    r = report(_bell_transfer())
    assert r.eof == pytest.approx(1.0, abs=1e-12)
    assert r.lambda4 == pytest.approx(-0.5, abs=1e-12)
    assert r.concurrence == pytest.approx(1.0, abs=1e-12)
    assert r.x_form
    r = report(np.eye(4) / 4)
    assert r.eof == 0 and r.lambda4 == pytest.approx(0.25)


def test_table_peak_state():
    co = coefficients(CVStateSpec.from_mean("tmc", 1.09))
    arm = ArmParams(4.66)
    rho = reduce_to_qubits(evolve_joint(co, QubitPrep.ground(), QubitPrep.ground(), arm, arm))
    assert report(rho).eof == pytest.approx(0.90, abs=0.01)


def test_local_unitary_invariance():
    rng = np.random.default_rng(44)
    for _ in range(100):
        rho = _random_state(rng)
        u = np.kron(_random_su2(rng), _random_su2(rng))
        rotated = u @ rho @ u.conj().T
        assert concurrence(rotated) == pytest.approx(concurrence(rho), abs=1e-10)
        e1, e2 = report(rotated).eof, report(rho).eof
        assert e1 == pytest.approx(e2, abs=1e-10)


def test_pure_state_concurrence():
    rng = np.random.default_rng(6)
    for _ in range(50):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        expected = 2 * abs(psi[0] * psi[3] - psi[1] * psi[2])
        assert concurrence(np.outer(psi, psi.conj())) == pytest.approx(expected, abs=1e-7)


def test_measure_consistency_on_random_states():
    rng = np.random.default_rng(10)
    rhos = np.stack([_random_state(rng) for _ in range(300)])
    rep = report_batch(rhos)
    assert np.all(rep["lambda4"] >= -0.5 - 1e-9)
    zero_c = rep["concurrence"] <= 1e-12
    assert np.all((rep["eof"] <= 1e-12) == zero_c)
    # for two qubits a negative partial transpose is equivalent to entanglement
    entangled = rep["concurrence"] > 1e-6
    assert np.all(rep["lambda4"][entangled] < 0)


def test_pipeline_negativity_matches_concurrence():
    rng = np.random.default_rng(13)
    for _ in range(100):
        fam = rng.choice(["twb", "tmc"])
        co = coefficients(CVStateSpec.from_mean(fam, rng.uniform(0.05, 4)))
        prep = QubitPrep.ground() if rng.integers(2) else QubitPrep.excited()
        arm_a, arm_b = ArmParams(rng.uniform(0, 12)), ArmParams(rng.uniform(0, 12))
        r = report(reduce_to_qubits(evolve_joint(co, prep, prep, arm_a, arm_b)))
        assert r.x_form
        if r.lambda4 < -1e-10:
            assert r.concurrence > 0
        if r.concurrence > 1e-10:
            assert r.lambda4 < 0


def test_check_density_rejections():
    with pytest.raises(ContractViolation):
        check_density(np.eye(4))
    m = np.eye(4) / 4
    m[0, 1] = 0.1
    with pytest.raises(ContractViolation):
        check_density(m)
    with pytest.raises(ContractViolation):
        check_density(np.diag([0.6, 0.5, 0.0, -0.1]))
    with pytest.raises(ContractViolation):
        report(np.eye(2))
