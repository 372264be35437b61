import numpy as np
import pytest

from clockgap._validation import DimensionError
from clockgap.circuit import Circuit, Gate
from clockgap.hamiltonian import CircuitHamiltonian, build_hamiltonian, energy, history_state
from clockgap.spectral import (
    COMPLETENESS_LIKE,
    SOUNDNESS_LIKE,
    VIOLATION,
    ConvergenceError,
    classify,
    gap_report,
    min_eigenvalue_dense,
    min_eigenvalue_iterative,
    soundness_bound,
)

from _fixtures import FIXTURES, circ_hh, circ_id, circ_rev3, circ_x

# smallest eigenvalue of [[1/2, -1/2], [-1/2, 3/2]]: 1 - sqrt(2)/2
CIRC_ID_LAMBDA = 1 - np.sqrt(2) / 2


def test_closed_form_matches_numpy_on_hand_block():
    block = np.array([[0.5, -0.5], [-0.5, 1.5]])
    assert np.linalg.eigvalsh(block)[0] == pytest.approx(CIRC_ID_LAMBDA, abs=1e-15)
    assert CIRC_ID_LAMBDA == pytest.approx(0.2928932, abs=1e-7)


def test_dense_examples():
    lam, vec = min_eigenvalue_dense(build_hamiltonian(circ_x(), "0"))
    assert abs(lam) <= 1e-10
    assert abs(np.linalg.norm(vec) - 1) <= 1e-12
    lam, _ = min_eigenvalue_dense(build_hamiltonian(circ_id(), "0"))
    assert lam == pytest.approx(CIRC_ID_LAMBDA, abs=1e-12)


def test_dense_prop_only_is_zero():
    H = build_hamiltonian(circ_id(), "0")
    props = CircuitHamiltonian(H.circuit, H.x, False, H.terms[: H.T])
    lam, _ = min_eigenvalue_dense(props)
    assert abs(lam) <= 1e-12


def test_dense_cap():
    big = Circuit(9, 1, [Gate.named("X", [1])] * 8)
    with pytest.raises(DimensionError):
        min_eigenvalue_dense(build_hamiltonian(big, "0"))


def test_iterative_examples():
    lam, vec, its = min_eigenvalue_iterative(build_hamiltonian(circ_id(), "0"), tol=1e-8)
    assert lam == pytest.approx(CIRC_ID_LAMBDA, abs=1e-8)
    lam, _, _ = min_eigenvalue_iterative(build_hamiltonian(circ_x(), "0"), tol=1e-8)
    assert lam <= 1e-8
    H = build_hamiltonian(circ_rev3(), "110")
    dense, _ = min_eigenvalue_dense(H)
    lam, vec, _ = min_eigenvalue_iterative(H, tol=1e-8)
    assert lam == pytest.approx(dense, abs=1e-8)
    assert np.linalg.norm(H @ vec - lam * vec) <= 1e-8


def test_iterative_is_deterministic_given_seed():
    H = build_hamiltonian(circ_rev3(), "011")
    a = min_eigenvalue_iterative(H, seed=3)
    b = min_eigenvalue_iterative(H, seed=3)
    assert a[0] == b[0] and a[2] == b[2] and np.array_equal(a[1], b[1])


def test_iterative_reports_non_convergence():
    H = build_hamiltonian(circ_rev3(), "110")
    with pytest.raises(ConvergenceError) as info:
        min_eigenvalue_iterative(H, tol=1e-8, max_iter=3)
    assert info.value.iterations == 3


def test_iterative_rejects_bad_tol():
    with pytest.raises(ValueError):
        min_eigenvalue_iterative(build_hamiltonian(circ_id(), "0"), tol=0)


def test_iterative_beyond_dense_cap():
    # 2**10 * 5 = 5120 > 4096: X then identities keep acceptance 1 for x = 0
    gates = [Gate.named("X", [1])] + [Gate.named("I", [k]) for k in (2, 3, 4)]
    circuit = Circuit(10, 1, gates)
    report = gap_report(circuit, "0")
    assert report.method == "iterative"
    assert report.verdict == COMPLETENESS_LIKE
    assert report.residual <= 1e-8


@pytest.mark.parametrize("name, factory, x", FIXTURES, ids=[f"{f[0]}-{f[2]}" for f in FIXTURES])
def test_dense_and_iterative_agree(name, factory, x):
    H = build_hamiltonian(factory(), x)
    dense, dvec = min_eigenvalue_dense(H)
    lam, vec, _ = min_eigenvalue_iterative(H, tol=1e-8)
    assert abs(dense - lam) <= 1e-7
    assert dense >= -1e-10
    assert energy(H, dvec) == pytest.approx(dense, abs=1e-9)
    assert energy(H, vec) == pytest.approx(lam, abs=1e-9)


def test_gap_report_examples():
    r = gap_report(circ_x(), "0")
    assert r.verdict == COMPLETENESS_LIKE and r.bound == 1 / 16 == 0.0625
    assert (r.S, r.T, r.n, r.K) == (1, 1, 1, 1)
    r = gap_report(circ_id(), "0")
    assert r.verdict == SOUNDNESS_LIKE and r.lambda_min == pytest.approx(0.29289, abs=1e-5)
    r = gap_report(circ_hh(), "0")
    assert r.bound == 1 / 54
    assert r.lambda_min >= 1 / 54 and r.verdict == SOUNDNESS_LIKE
    assert r.residual <= 1e-8 and r.accepted


def test_circ_hh_closed_form():
    # sector |0>: clock matrix for HH on x=0; lambda_min from numpy on the hand matrix
    s = 1 / np.sqrt(8)
    # basis (clock, data): (0,0) (0,1) (1,0) (1,1) (2,0) (2,1)
    m = np.array(
        [
            [0.5, 0, -s, -s, 0, 0],
            [0, 1.5, -s, s, 0, 0],
            [-s, -s, 1, 0, -s, -s],
            [-s, s, 0, 1, -s, s],
            [0, 0, -s, -s, 1.5, 0],
            [0, 0, -s, s, 0, 0.5],
        ]
    )
    assert gap_report(circ_hh(), "0").lambda_min == pytest.approx(np.linalg.eigvalsh(m)[0], abs=1e-12)


def test_report_serialization():
    d = gap_report(circ_x(), "0", method="iterative").to_dict()
    assert d["method"] == "iterative" and d["dims"] == {"S": 1, "T": 1, "n": 1, "K": 1}
    assert set(d) >= {"lambda_min", "iterations", "residual", "bound", "verdict"}


def test_classify():
    b = soundness_bound(3)
    assert b == 1 / 128
    assert classify(0.0, b) == COMPLETENESS_LIKE
    assert classify(1e-9, b) == COMPLETENESS_LIKE
    assert classify(b / 2, b) == VIOLATION
    assert classify(b, b) == SOUNDNESS_LIKE


def test_history_state_is_ground_state_when_accepting():
    c = circ_x()
    H = build_hamiltonian(c, "0")
    _, vec = min_eigenvalue_dense(H)
    assert abs(abs(np.vdot(vec, history_state(c, "0"))) - 1) <= 1e-10
