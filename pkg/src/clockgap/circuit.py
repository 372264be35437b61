"""Quantum circuits over a few qubits and exact statevector simulation.

Basis convention: qubit 1 is the most significant bit of a basis index, so
``|q1 q2 ... qS>`` has index ``q1 * 2**(S-1) + ... + qS``. For a gate on
targets ``(a, b, ...)`` the first target is the most significant bit of the
gate's own matrix index (for CNOT the first target is the control).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path

import numpy as np

from ._validation import check_bitstring, check_unit

UNITARY_TOL = 1e-10
MAX_ARITY = 3

_SQRT1_2 = 1 / np.sqrt(2)


def _controlled_x(num_controls: int) -> np.ndarray:
    dim = 2 ** (num_controls + 1)
    m = np.eye(dim, dtype=complex)
    m[[dim - 2, dim - 1]] = m[[dim - 1, dim - 2]]
    return m


NAMED_GATES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2,
    "CNOT": _controlled_x(1),
    "TOFFOLI": _controlled_x(2),
}
for _m in NAMED_GATES.values():
    _m.setflags(write=False)

REVERSIBLE_GATES = frozenset({"X", "CNOT", "TOFFOLI"})


class CircuitError(ValueError):
    """Invalid gate or circuit definition."""


@dataclass(frozen=True, eq=False)
class Gate:
    """A unitary on 1 to 3 qubits.

    ``name`` is one of :data:`NAMED_GATES` or ``None`` for an explicit matrix.
    ``targets`` are 1-based qubit indices.
    """

    matrix: np.ndarray
    targets: tuple[int, ...]
    name: str | None = None

    def __post_init__(self):
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        k = len(targets)
        if not 1 <= k <= MAX_ARITY:
            raise CircuitError(f"gate must act on 1 to {MAX_ARITY} qubits, got {k}")
        if any(t < 1 for t in targets):
            raise CircuitError("target index must be >= 1")
        if len(set(targets)) != k:
            raise CircuitError(f"targets must be distinct, got {list(targets)}")
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (2**k, 2**k):
            raise CircuitError(
                f"matrix shape {matrix.shape} does not match {k} target(s)"
            )
        if not np.allclose(matrix.conj().T @ matrix, np.eye(2**k), rtol=0, atol=UNITARY_TOL):
            raise CircuitError("matrix is not unitary")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def named(cls, name: str, targets) -> Gate:
        name = name.upper()
        if name not in NAMED_GATES:
            raise CircuitError(f"unknown gate name {name!r}")
        targets = tuple(targets)
        base = NAMED_GATES[name]
        if name == "I":
            matrix = np.eye(2 ** len(targets), dtype=complex)
        else:
            matrix = base
            arity = int(np.log2(base.shape[0]))
            if len(targets) != arity:
                raise CircuitError(f"{name} takes {arity} target(s), got {len(targets)}")
        return cls(matrix, targets, name)

    @property
    def arity(self) -> int:
        return len(self.targets)

    def adjoint(self) -> Gate:
        if self.name in {"I", "X", "H", "CNOT", "TOFFOLI"}:
            return self
        return Gate(self.matrix.conj().T, self.targets)

    def __repr__(self):
        label = self.name or "U"
        return f"{label}{list(self.targets)}"


@dataclass(frozen=True, eq=False)
class Circuit:
    """Ordered gates ``U_1 ... U_T`` on ``num_qubits`` qubits.

    The first ``num_input_bits`` qubits carry the input; the rest start in 0.
    """

    num_qubits: int
    num_input_bits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.num_qubits < 1:
            raise CircuitError("circuit needs at least one qubit")
        if not 1 <= self.num_input_bits <= self.num_qubits:
            raise CircuitError(
                f"input_bits must be in [1, {self.num_qubits}], got {self.num_input_bits}"
            )
        if not self.gates:
            raise CircuitError("circuit needs at least one gate")
        for pos, gate in enumerate(self.gates):
            bad = [t for t in gate.targets if t > self.num_qubits]
            if bad:
                raise CircuitError(
                    f"gates[{pos}]: target {bad[0]} exceeds qubit count {self.num_qubits}"
                )

    @property
    def num_gates(self) -> int:
        return len(self.gates)

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def __len__(self):
        return len(self.gates)


def apply_gate(state, gate: Gate, num_qubits: int) -> np.ndarray:
    """Apply ``gate`` (tensored with identity elsewhere) to a statevector."""
    if max(gate.targets) > num_qubits:
        raise CircuitError(f"gate {gate!r} targets a qubit beyond {num_qubits}")
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (2**num_qubits,):
        raise ValueError(f"state has shape {psi.shape}, expected ({2 ** num_qubits},)")
    k = gate.arity
    axes = [t - 1 for t in gate.targets]
    tensor = np.moveaxis(psi.reshape((2,) * num_qubits), axes, range(k))
    shape = tensor.shape
    out = gate.matrix @ tensor.reshape(2**k, -1)
    out = np.moveaxis(out.reshape(shape), range(k), axes)
    return np.ascontiguousarray(out).reshape(-1)


def basis_state(bits: str) -> np.ndarray:
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def start_state(circuit: Circuit, x) -> np.ndarray:
    """The basis state ``|x>|0...0>`` the circuit starts from."""
    x = check_bitstring(x, circuit.num_input_bits)
    return basis_state(x + "0" * (circuit.num_qubits - circuit.num_input_bits))


def prefix_state(circuit: Circuit, x, t: int) -> np.ndarray:
    """``U_t ... U_1`` applied to the start state; ``t = 0`` gives the start state."""
    if not 0 <= t <= circuit.num_gates:
        raise ValueError(f"step t={t} outside [0, {circuit.num_gates}]")
    return reduce(
        lambda psi, g: apply_gate(psi, g, circuit.num_qubits),
        circuit.gates[:t],
        start_state(circuit, x),
    )


def prefix_states(circuit: Circuit, x) -> np.ndarray:
    """All prefix states stacked as rows ``t = 0..T``."""
    psi = start_state(circuit, x)
    rows = [psi]
    for gate in circuit.gates:
        psi = apply_gate(psi, gate, circuit.num_qubits)
        rows.append(psi)
    return np.array(rows)


def qubit_one_probability(psi, num_qubits: int) -> float:
    """Probability that measuring qubit 1 of ``psi`` gives 1."""
    half = 2 ** (num_qubits - 1)
    return float(np.sum(np.abs(np.asarray(psi)[half:]) ** 2))


def acceptance_probability(circuit: Circuit, x) -> float:
    """Probability that qubit 1 reads 1 after running the whole circuit."""
    final = prefix_state(circuit, x, circuit.num_gates)
    return qubit_one_probability(final, circuit.num_qubits)


def run_circuit(circuit: Circuit, psi) -> np.ndarray:
    psi = check_unit(psi, circuit.dim)
    for gate in circuit.gates:
        psi = apply_gate(psi, gate, circuit.num_qubits)
    return psi


def gate_unitary(gate: Gate, num_qubits: int) -> np.ndarray:
    """Full ``2**S x 2**S`` matrix of a gate, assembled entry by entry.

    Written with explicit bit manipulation so it can serve as an oracle for
    :func:`apply_gate`.
    """
    dim = 2**num_qubits
    shifts = [num_qubits - t for t in gate.targets]
    mask = sum(1 << s for s in shifts)
    k = gate.arity
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        sub_in = 0
        for s in shifts:
            sub_in = (sub_in << 1) | ((col >> s) & 1)
        rest = col & ~mask
        for sub_out in range(2**k):
            row = rest
            for j, s in enumerate(shifts):
                row |= ((sub_out >> (k - 1 - j)) & 1) << s
            full[row, col] += gate.matrix[sub_out, sub_in]
    return full


def circuit_unitary(circuit: Circuit, upto: int | None = None) -> np.ndarray:
    upto = circuit.num_gates if upto is None else upto
    u = np.eye(circuit.dim, dtype=complex)
    for gate in circuit.gates[:upto]:
        u = gate_unitary(gate, circuit.num_qubits) @ u
    return u


# -- file format ------------------------------------------------------------

_CIRCUIT_FIELDS = {"qubits", "input_bits", "gates"}
_GATE_FIELDS = {"name", "matrix", "targets"}


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise CircuitError(f"{where}: expected an integer, got {value!r}")
    return value


def _parse_matrix(raw, where: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise CircuitError(f"{where}.matrix: expected a non-empty array of rows")
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise CircuitError(f"{where}.matrix: entries must be [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise CircuitError(f"{where}.matrix: expected a square array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def parse_gate(raw, where: str = "gate") -> Gate:
    if not isinstance(raw, dict):
        raise CircuitError(f"{where}: expected an object")
    unknown = set(raw) - _GATE_FIELDS
    if unknown:
        raise CircuitError(f"{where}: unknown field {sorted(unknown)[0]!r}")
    if ("name" in raw) == ("matrix" in raw):
        raise CircuitError(f"{where}: exactly one of 'name' or 'matrix' is required")
    if "targets" not in raw:
        raise CircuitError(f"{where}: missing field 'targets'")
    targets = raw["targets"]
    if not isinstance(targets, list) or not targets:
        raise CircuitError(f"{where}.targets: expected a non-empty array")
    targets = [_as_int(t, f"{where}.targets") for t in targets]
    if any(t < 1 for t in targets):
        raise CircuitError(f"{where}.targets: target index must be >= 1")
    try:
        if "name" in raw:
            if not isinstance(raw["name"], str):
                raise CircuitError(f"{where}.name: expected a string")
            return Gate.named(raw["name"], targets)
        return Gate(_parse_matrix(raw["matrix"], where), targets)
    except CircuitError as exc:
        if str(exc).startswith(where):
            raise
        raise CircuitError(f"{where}: {exc}") from None


def parse_circuit(doc) -> Circuit:
    """Build a :class:`Circuit` from a decoded circuit document (strict)."""
    if not isinstance(doc, dict):
        raise CircuitError("circuit document must be an object")
    unknown = set(doc) - _CIRCUIT_FIELDS
    if unknown:
        raise CircuitError(f"unknown field {sorted(unknown)[0]!r}")
    for key in ("qubits", "input_bits", "gates"):
        if key not in doc:
            raise CircuitError(f"missing field {key!r}")
    num_qubits = _as_int(doc["qubits"], "qubits")
    num_inputs = _as_int(doc["input_bits"], "input_bits")
    if not isinstance(doc["gates"], list):
        raise CircuitError("gates: expected an array")
    gates = [parse_gate(g, f"gates[{i}]") for i, g in enumerate(doc["gates"])]
    return Circuit(num_qubits, num_inputs, gates)


def load_circuit(path) -> Circuit:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"{path}: not valid JSON ({exc})") from None
    return parse_circuit(doc)


def circuit_to_dict(circuit: Circuit) -> dict:
    gates = []
    for gate in circuit.gates:
        if gate.name is not None:
            gates.append({"name": gate.name, "targets": list(gate.targets)})
        else:
            matrix = [[[float(z.real), float(z.imag)] for z in row] for row in gate.matrix]
            gates.append({"matrix": matrix, "targets": list(gate.targets)})
    return {
        "qubits": circuit.num_qubits,
        "input_bits": circuit.num_input_bits,
        "gates": gates,
    }


def save_circuit(circuit: Circuit, path) -> None:
    Path(path).write_text(json.dumps(circuit_to_dict(circuit), indent=2) + "\n")
