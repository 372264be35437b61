"""Compile small boolean predicates into reversible circuits with 0/1 acceptance.

Wire layout for an arity-``m`` table:

* wire 1: output. It starts holding ``x_1``; two CNOTs move ``x_1`` to the
  relocation wire ``m + 1`` and leave wire 1 at 0.
* wires 2..m: inputs ``x_2..x_m`` (untouched).
* wire ``m + 2``: scratch; receives ``f(x)``, is copied onto wire 1, then
  uncomputed.

Flips with three or more controls borrow a wire in an unknown state (wire 1
when free, else an input wire) and restore it, so no extra work wires are
needed.

The compute block is an exclusive sum of products (by default the
positive-polarity Reed-Muller expansion, optionally one product per satisfying
minterm). Every gate is self-inverse, so uncomputation is the compute block
reversed and the scratch-wire gate sequence is a palindrome around the copy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import check_bitstring
from .circuit import Circuit, Gate, apply_gate, basis_state
from .hamiltonian import CircuitHamiltonian, build_hamiltonian
from .spectral import SpectralReport, spectral_report

MAX_ARITY = 4


class TruthTableError(ValueError):
    pass


@dataclass(frozen=True)
class TruthTable:
    """``values[int(x, 2)]`` is ``f(x)``; ``x_1`` is the most significant bit."""

    arity: int
    values: tuple[bool, ...]

    def __post_init__(self):
        if not 1 <= self.arity <= MAX_ARITY:
            raise TruthTableError(f"arity must be in [1, {MAX_ARITY}], got {self.arity}")
        values = tuple(bool(v) for v in self.values)
        if len(values) != 2**self.arity:
            raise TruthTableError(
                f"values has length {len(values)}, expected {2 ** self.arity}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, arity: int, func) -> TruthTable:
        values = [func(*(int(b) for b in format(i, f"0{arity}b"))) for i in range(2**arity)]
        return cls(arity, tuple(values))

    @classmethod
    def from_index(cls, arity: int, index: int) -> TruthTable:
        """Table whose value on input ``i`` is bit ``i`` of ``index``."""
        return cls(arity, tuple((index >> i) & 1 for i in range(2**arity)))

    def __call__(self, x) -> bool:
        return self.values[int(check_bitstring(x, self.arity), 2)]

    def inputs(self) -> list[str]:
        return [format(i, f"0{self.arity}b") for i in range(2**self.arity)]


def parse_truth_table(doc) -> TruthTable:
    if not isinstance(doc, dict):
        raise TruthTableError("truth table must be an object")
    unknown = set(doc) - {"arity", "values"}
    if unknown:
        raise TruthTableError(f"unknown field {sorted(unknown)[0]!r}")
    for key in ("arity", "values"):
        if key not in doc:
            raise TruthTableError(f"missing field {key!r}")
    arity, values = doc["arity"], doc["values"]
    if isinstance(arity, bool) or not isinstance(arity, int):
        raise TruthTableError("arity: expected an integer")
    if not isinstance(values, list) or any(v not in (0, 1) or isinstance(v, float) for v in values):
        raise TruthTableError("values: expected an array of 0/1")
    return TruthTable(arity, tuple(values))


def load_truth_table(path) -> TruthTable:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise TruthTableError(f"{path}: not valid JSON ({exc})") from None
    return parse_truth_table(doc)


def reed_muller_coefficients(table: TruthTable) -> list[int]:
    """GF(2) Moebius transform: ``f(x) = XOR of prod_{i in S} x_i`` over masks ``S`` with coefficient 1.

    Mask bit ``m - j`` stands for variable ``x_j``, matching the table index.
    """
    coeffs = [int(v) for v in table.values]
    for bit in range(table.arity):
        step = 1 << bit
        for mask in range(2**table.arity):
            if mask & step:
                coeffs[mask] ^= coeffs[mask ^ step]
    return coeffs


@dataclass(frozen=True, eq=False)
class ReversibleCircuit:
    circuit: Circuit
    table: TruthTable
    strategy: str
    input_wires: tuple[int, ...]  # wire holding x_j at the end, j = 1..m
    output_wire: int
    scratch_wire: int
    borrowed_wires: tuple[int, ...]
    copy_position: int  # 0-based index of the copy gate

    @property
    def layout(self) -> dict:
        return {
            "inputs": {f"x{j + 1}": w for j, w in enumerate(self.input_wires)},
            "output": self.output_wire,
            "scratch": self.scratch_wire,
            "borrowed": list(self.borrowed_wires),
        }


def _multi_controlled_x(controls: list[int], target: int, borrowable: list[int]) -> list[Gate]:
    """Flip ``target`` iff all ``controls`` are 1, borrowing a wire in any state.

    For ``k >= 3`` controls, with ``a`` a borrowed wire and controls split as
    ``C1 = controls[:2]``, ``C2 = controls[2:]``, the sequence
    ``[C1 -> a, C2 + a -> t] * 2`` flips ``t`` by ``AND(C1) AND(C2)`` and
    leaves ``a`` unchanged whatever it held.
    """
    k = len(controls)
    if k == 0:
        return [Gate.named("X", [target])]
    if k == 1:
        return [Gate.named("CNOT", [controls[0], target])]
    if k == 2:
        return [Gate.named("TOFFOLI", [*controls, target])]
    busy = set(controls) | {target}
    free = [w for w in borrowable if w not in busy]
    if not free:
        raise ValueError("no wire available to borrow")
    a = free[0]
    head, tail = controls[:2], controls[2:]
    pool = borrowable + head + [target]
    first = _multi_controlled_x(head, a, pool)
    second = _multi_controlled_x(tail + [a], target, pool)
    return first + second + first + second


def _products(table: TruthTable, strategy: str) -> list[tuple[list[int], list[int]]]:
    """``(variables, negated)`` per product term, variables 0-based."""
    m = table.arity
    if strategy == "pprm":
        coeffs = reed_muller_coefficients(table)
        masks = [s for s in range(2**m) if coeffs[s]]
        masks.sort(key=lambda s: (bin(s).count("1"), -s))
        return [([j for j in range(m) if s >> (m - 1 - j) & 1], []) for s in masks]
    if strategy == "minterm":
        out = []
        for idx, value in enumerate(table.values):
            if value:
                bits = format(idx, f"0{m}b")
                out.append((list(range(m)), [j for j in range(m) if bits[j] == "0"]))
        return out
    raise ValueError(f"unknown strategy {strategy!r}")


def compile_truth_table(table: TruthTable, strategy: str = "pprm") -> ReversibleCircuit:
    """Reversible circuit whose qubit 1 ends in ``f(x)`` for every input ``x``."""
    m = table.arity
    relocated = m + 1
    scratch = m + 2
    wire_of = [relocated] + list(range(2, m + 1))
    products = _products(table, strategy)
    # wire 1 is idle until the copy and may be borrowed in any state
    borrowable = [1]

    compute: list[Gate] = []
    for variables, negated in products:
        flips = [Gate.named("X", [wire_of[j]]) for j in negated]
        controls = [wire_of[j] for j in variables]
        compute += flips + _multi_controlled_x(controls, scratch, borrowable + wire_of) + flips

    gates = [Gate.named("CNOT", [1, relocated]), Gate.named("CNOT", [relocated, 1])]
    gates += compute
    copy_position = len(gates)
    gates.append(Gate.named("CNOT", [scratch, 1]))
    gates += compute[::-1]
    circuit = Circuit(scratch, m, gates)
    return ReversibleCircuit(
        circuit=circuit,
        table=table,
        strategy=strategy,
        input_wires=tuple(wire_of),
        output_wire=1,
        scratch_wire=scratch,
        borrowed_wires=tuple(borrowable),
        copy_position=copy_position,
    )


@dataclass(frozen=True)
class ReversibilityResult:
    is_permutation: bool
    witness: str | None = None
    reason: str = ""
    permutation: tuple[int, ...] | None = None

    def __bool__(self):
        return self.is_permutation


def verify_reversibility(circuit: Circuit, tol: float = 1e-12) -> ReversibilityResult:
    """Check that every basis state maps to a single basis state, injectively."""
    S = circuit.num_qubits
    images = []
    seen = {}
    for index in range(circuit.dim):
        label = format(index, f"0{S}b")
        psi = basis_state(label)
        for gate in circuit.gates:
            psi = apply_gate(psi, gate, S)
        image = int(np.argmax(np.abs(psi)))
        if abs(abs(psi[image]) - 1) > tol:
            return ReversibilityResult(False, label, "maps to a superposition")
        if image in seen:
            return ReversibilityResult(
                False, label, f"same image as {format(seen[image], f'0{S}b')}"
            )
        seen[image] = index
        images.append(image)
    return ReversibilityResult(True, permutation=tuple(images))


def work_wire_gates(rc: ReversibleCircuit) -> list[Gate]:
    """Gates touching the scratch wire, in circuit order."""
    return [g for g in rc.circuit.gates if rc.scratch_wire in g.targets]


def end_to_end_instance(
    table: TruthTable,
    x,
    method: str = "auto",
    strategy: str = "pprm",
    seed: int = 0,
) -> tuple[CircuitHamiltonian, SpectralReport]:
    """Compile ``table``, build its Hamiltonian with ancilla checks and report the gap."""
    x = check_bitstring(x, table.arity)
    rc = compile_truth_table(table, strategy)
    H = build_hamiltonian(rc.circuit, x, include_ancilla_checks=True)
    return H, spectral_report(H, method=method, seed=seed)


def all_tables(arity: int):
    for index in range(2 ** (2**arity)):
        yield TruthTable.from_index(arity, index)


def sample_tables(arity: int, count: int, seed: int = 0) -> list[TruthTable]:
    total = 2 ** (2**arity)
    if count >= total:
        return list(all_tables(arity))
    rng = np.random.default_rng(seed)
    picks = rng.choice(total, size=count, replace=False)
    return [TruthTable.from_index(arity, int(i)) for i in sorted(picks)]


def majority(*bits) -> bool:
    return sum(bits) * 2 > len(bits)


STANDARD_TABLES = {
    "identity": TruthTable(1, (0, 1)),
    "not": TruthTable(1, (1, 0)),
    "and": TruthTable(2, (0, 0, 0, 1)),
    "or": TruthTable(2, (0, 1, 1, 1)),
    "xor": TruthTable(2, (0, 1, 1, 0)),
    "and3": TruthTable(3, (0,) * 7 + (1,)),
    "majority3": TruthTable.from_function(3, majority),
}
