"""Named circuits shared by the test modules."""

import numpy as np

from clockgap.circuit import Circuit, Gate
from clockgap.revcomp import STANDARD_TABLES, compile_truth_table


def circ_x(num_qubits=1):
    return Circuit(num_qubits, 1, [Gate.named("X", [1])])


def circ_id():
    return Circuit(1, 1, [Gate.named("I", [1])])


def circ_h():
    return Circuit(1, 1, [Gate.named("H", [1])])


def circ_hh():
    return Circuit(1, 1, [Gate.named("H", [1]), Gate.named("H", [1])])


def circ_rev3():
    return compile_truth_table(STANDARD_TABLES["and3"]).circuit


def circ_random(seed=0, num_qubits=3, num_gates=4):
    """Mixed named and random-unitary gates, complex entries included."""
    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(num_gates):
        k = int(rng.integers(1, min(3, num_qubits) + 1))
        targets = rng.choice(np.arange(1, num_qubits + 1), size=k, replace=False)
        z = rng.standard_normal((2**k, 2**k)) + 1j * rng.standard_normal((2**k, 2**k))
        q, _ = np.linalg.qr(z)
        gates.append(Gate(q, targets))
    return Circuit(num_qubits, 2, gates)


# (name, circuit factory, input) for every fixture used in property checks
FIXTURES = [
    ("CIRC-X", circ_x, "0"),
    ("CIRC-X", circ_x, "1"),
    ("CIRC-ID", circ_id, "0"),
    ("CIRC-ID", circ_id, "1"),
    ("CIRC-H", circ_h, "0"),
    ("CIRC-HH", circ_hh, "0"),
    ("CIRC-HH", circ_hh, "1"),
    ("CIRC-REV3", circ_rev3, "110"),
    ("CIRC-REV3", circ_rev3, "111"),
    ("CIRC-RAND", circ_random, "10"),
]


def random_unit(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def ket(circuit, bits, clock):
    """|bits> (x) |clock> as a flat clocked vector."""
    psi = np.zeros(circuit.dim * (circuit.num_gates + 1), dtype=complex)
    psi[clock * circuit.dim + int(bits, 2)] = 1.0
    return psi
