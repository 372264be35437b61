"""Clock Hamiltonian for a circuit and input.

States live on ``data (x) clock`` with the clock a ``(T+1)``-level register.
A clocked vector is stored flat with index ``t * 2**S + d``, i.e. reshaping
to ``(T + 1, 2**S)`` gives one data block per clock value.

Terms (all positive semidefinite):

* ``In(i)``: penalise qubit ``i`` differing from ``x_i`` at clock 0.
* ``AncillaIn(i)``: penalise work qubit ``i > n`` being 1 at clock 0.
* ``Out``: penalise qubit 1 reading 0 at clock ``T``.
* ``Prop(t)``: penalise clock blocks ``t-1`` and ``t`` not being related by
  ``U_t``; acts as ``(|t><t| + |t-1><t-1|) (x) I / 2 - (U_t (x) |t><t-1| + h.c.) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._validation import DimensionError, check_bitstring, check_unit, check_vector
from .circuit import Circuit, Gate, apply_gate, gate_unitary, prefix_states

DENSE_CAP = 4096

TERM_KINDS = ("Prop", "In", "AncillaIn", "Out")


@dataclass(frozen=True, eq=False)
class HamiltonianTerm:
    kind: str
    index: int | None
    circuit: Circuit
    x: str

    @property
    def tag(self) -> str:
        return self.kind if self.index is None else f"{self.kind}({self.index})"

    def __repr__(self):
        return f"HamiltonianTerm({self.tag})"


@dataclass(frozen=True, eq=False)
class CircuitHamiltonian:
    """Sum of clock-construction terms for one circuit and input.

    Never stores a matrix; use :func:`apply_hamiltonian` or
    :func:`materialize_dense`.
    """

    circuit: Circuit
    x: str
    include_ancilla_checks: bool
    terms: tuple[HamiltonianTerm, ...]

    @property
    def T(self) -> int:
        return self.circuit.num_gates

    @property
    def S(self) -> int:
        return self.circuit.num_qubits

    @property
    def n(self) -> int:
        return self.circuit.num_input_bits

    @property
    def K(self) -> int:
        """Number of clock-0 input checks (``n``, or ``S`` with ancilla checks)."""
        return self.S if self.include_ancilla_checks else self.n

    @property
    def dim(self) -> int:
        return 2**self.S * (self.T + 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    @property
    def soundness_bound(self) -> float:
        return 1 / (2 * (self.T + 1) ** 3)

    @cached_property
    def _kernel(self) -> _PropagationKernel:
        return _PropagationKernel.build(self)

    def matvec(self, psi) -> np.ndarray:
        return apply_hamiltonian(self, psi)

    def __matmul__(self, psi):
        return apply_hamiltonian(self, psi)


def build_hamiltonian(circuit: Circuit, x, include_ancilla_checks: bool = True) -> CircuitHamiltonian:
    """Assemble the term list ``Prop(1..T), In(1..n), [AncillaIn(n+1..S)], Out``."""
    x = check_bitstring(x, circuit.num_input_bits)
    T, n, S = circuit.num_gates, circuit.num_input_bits, circuit.num_qubits
    terms = [HamiltonianTerm("Prop", t, circuit, x) for t in range(1, T + 1)]
    terms += [HamiltonianTerm("In", i, circuit, x) for i in range(1, n + 1)]
    if include_ancilla_checks:
        terms += [HamiltonianTerm("AncillaIn", i, circuit, x) for i in range(n + 1, S + 1)]
    terms.append(HamiltonianTerm("Out", None, circuit, x))
    return CircuitHamiltonian(circuit, x, bool(include_ancilla_checks), tuple(terms))


def _blocks(psi, circuit: Circuit) -> np.ndarray:
    dim = 2**circuit.num_qubits * (circuit.num_gates + 1)
    psi = check_vector(psi, dim)
    return psi.reshape(circuit.num_gates + 1, 2**circuit.num_qubits)


def penalized_bit(term: HamiltonianTerm) -> tuple[int, int, int]:
    """``(qubit, bad_value, clock)`` for a projector term."""
    if term.kind == "In":
        return term.index, 1 - int(term.x[term.index - 1]), 0
    if term.kind == "AncillaIn":
        return term.index, 1, 0
    if term.kind == "Out":
        return 1, 0, term.circuit.num_gates
    raise ValueError(f"{term.tag} is not a projector term")


def _data_mask(S: int, qubit: int, value: int) -> np.ndarray:
    d = np.arange(2**S)
    return ((d >> (S - qubit)) & 1) == value


def _accumulate_term(term: HamiltonianTerm, blocks: np.ndarray, out: np.ndarray) -> None:
    circuit = term.circuit
    S = circuit.num_qubits
    if term.kind == "Prop":
        t = term.index
        gate = circuit.gates[t - 1]
        out[t] += 0.5 * (blocks[t] - apply_gate(blocks[t - 1], gate, S))
        out[t - 1] += 0.5 * (blocks[t - 1] - apply_gate(blocks[t], gate.adjoint(), S))
    else:
        qubit, bad, clock = penalized_bit(term)
        mask = _data_mask(S, qubit, bad)
        out[clock, mask] += blocks[clock, mask]


def apply_term(term: HamiltonianTerm, psi) -> np.ndarray:
    """Exact action of one term on a clocked vector."""
    blocks = _blocks(psi, term.circuit)
    out = np.zeros_like(blocks)
    _accumulate_term(term, blocks, out)
    return out.reshape(-1)


def gate_gather_table(gate: Gate, num_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """Index/coefficient tables with ``(U psi)[d] = sum_s coef[s, d] * psi[idx[s, d]]``."""
    d = np.arange(2**num_qubits)
    shifts = [num_qubits - t for t in gate.targets]
    k = gate.arity
    row = np.zeros_like(d)
    cleared = d.copy()
    for s_ in shifts:
        row = (row << 1) | ((d >> s_) & 1)
        cleared &= ~(1 << s_)
    idx = np.empty((2**k, d.size), dtype=np.intp)
    for sub in range(2**k):
        src = cleared.copy()
        for j, s_ in enumerate(shifts):
            src |= ((sub >> (k - 1 - j)) & 1) << s_
        idx[sub] = src
    coef = gate.matrix[row, :].T
    return idx, np.ascontiguousarray(coef)


@dataclass(frozen=True, eq=False)
class _PropagationKernel:
    """Gather tables for all gates and their adjoints, plus clock-0/T diagonals."""

    fwd_idx: np.ndarray  # (T, 2**k_max, 2**S)
    fwd_coef: np.ndarray
    adj_idx: np.ndarray
    adj_coef: np.ndarray
    start_penalty: np.ndarray  # (2**S,) diagonal of the clock-0 projector terms
    end_penalty: np.ndarray  # (2**S,) diagonal of the Out term

    @classmethod
    def build(cls, H: CircuitHamiltonian) -> _PropagationKernel:
        S, T = H.S, H.T
        k_max = max(g.arity for g in H.circuit.gates)
        shape = (T, 2**k_max, 2**S)
        fwd_idx, adj_idx = np.zeros(shape, np.intp), np.zeros(shape, np.intp)
        fwd_coef, adj_coef = np.zeros(shape, complex), np.zeros(shape, complex)
        for t, gate in enumerate(H.circuit.gates):
            rows = 2**gate.arity
            fwd_idx[t, :rows], fwd_coef[t, :rows] = gate_gather_table(gate, S)
            adj_idx[t, :rows], adj_coef[t, :rows] = gate_gather_table(gate.adjoint(), S)
        start = np.zeros(2**S)
        end = np.zeros(2**S)
        for term in H.terms:
            if term.kind == "Prop":
                continue
            qubit, bad, clock = penalized_bit(term)
            target = start if clock == 0 else end
            target += _data_mask(S, qubit, bad)
        if T == 0:
            raise ValueError("circuit has no gates")
        return cls(fwd_idx, fwd_coef, adj_idx, adj_coef, start, end)


def apply_hamiltonian(H: CircuitHamiltonian, psi) -> np.ndarray:
    """``H psi`` without forming a matrix.

    All propagation terms are applied at once through per-gate gather tables;
    the result equals the sum of :func:`apply_term` over the term list.
    """
    blocks = _blocks(psi, H.circuit)
    kern = H._kernel
    T = H.T
    steps = np.arange(T)[:, None, None]
    prev, now = blocks[:-1], blocks[1:]
    forward = np.sum(kern.fwd_coef * prev[steps, kern.fwd_idx], axis=1)
    backward = np.sum(kern.adj_coef * now[steps, kern.adj_idx], axis=1)
    out = np.zeros_like(blocks)
    out[1:] += 0.5 * (now - forward)
    out[:-1] += 0.5 * (prev - backward)
    out[0] += kern.start_penalty * blocks[0]
    out[T] += kern.end_penalty * blocks[T]
    return out.reshape(-1)


def apply_terms_sum(H: CircuitHamiltonian, psi) -> np.ndarray:
    """Reference ``H psi``: :func:`apply_term` summed in term-list order."""
    blocks = _blocks(psi, H.circuit)
    out = np.zeros_like(blocks)
    for term in H.terms:
        _accumulate_term(term, blocks, out)
    return out.reshape(-1)


# -- dense oracle -----------------------------------------------------------


def _qubit_projector(S: int, qubit: int, value: int) -> np.ndarray:
    single = np.zeros((2, 2))
    single[value, value] = 1.0
    factors = [np.eye(2)] * S
    factors[qubit - 1] = single
    out = np.ones((1, 1))
    for f in factors:
        out = np.kron(out, f)
    return out


def _add_term_dense(term: HamiltonianTerm, out: np.ndarray) -> None:
    # writes data-space blocks (clock row, clock column) of the term into out
    circuit = term.circuit
    S = circuit.num_qubits
    D = 2**S

    def block(r, c):
        return out[r * D:(r + 1) * D, c * D:(c + 1) * D]

    if term.kind == "Prop":
        t = term.index
        u = gate_unitary(circuit.gates[t - 1], S)
        half_eye = 0.5 * np.eye(D)
        block(t, t)[...] += half_eye
        block(t - 1, t - 1)[...] += half_eye
        block(t, t - 1)[...] -= 0.5 * u
        block(t - 1, t)[...] -= 0.5 * u.conj().T
    else:
        qubit, bad, clock = penalized_bit(term)
        block(clock, clock)[...] += _qubit_projector(S, qubit, bad)


def _check_dense_cap(dim: int) -> None:
    if dim > DENSE_CAP:
        raise DimensionError(f"dimension {dim} exceeds dense cap {DENSE_CAP}")


def materialize_term(term: HamiltonianTerm) -> np.ndarray:
    """Dense matrix of one term, assembled block by block from its definition."""
    circuit = term.circuit
    dim = circuit.dim * (circuit.num_gates + 1)
    _check_dense_cap(dim)
    out = np.zeros((dim, dim), dtype=complex)
    _add_term_dense(term, out)
    return out


def materialize_dense(H: CircuitHamiltonian) -> np.ndarray:
    _check_dense_cap(H.dim)
    out = np.zeros(H.shape, dtype=complex)
    for term in H.terms:
        _add_term_dense(term, out)
    return out


# -- states -----------------------------------------------------------------


def history_state(circuit: Circuit, x) -> np.ndarray:
    """Uniform superposition of ``U_t...U_1|x,0> (x) |t>`` over ``t = 0..T``."""
    rows = prefix_states(circuit, x)
    return rows.reshape(-1) / np.sqrt(circuit.num_gates + 1)


def clocked_basis_state(circuit: Circuit, bits: str, clock: int) -> np.ndarray:
    """``|bits> (x) |clock>`` as a flat clocked vector."""
    S, T = circuit.num_qubits, circuit.num_gates
    if len(bits) != S or not 0 <= clock <= T:
        raise ValueError(f"need {S} data bits and clock in [0, {T}]")
    psi = np.zeros((T + 1) * 2**S, dtype=complex)
    psi[clock * 2**S + int(bits, 2)] = 1.0
    return psi


def energy(H: CircuitHamiltonian, psi) -> float:
    """Expectation value ``<psi|H|psi>`` of a unit clocked state."""
    psi = check_unit(psi, H.dim)
    value = np.vdot(psi, apply_hamiltonian(H, psi))
    if abs(value.imag) > 1e-12 * max(1, len(H.terms)):
        raise ArithmeticError(f"energy has imaginary part {value.imag:.3e}")
    return float(value.real)


# -- dump -------------------------------------------------------------------


def term_dump(H: CircuitHamiltonian, include_matrices: bool = False) -> list[dict]:
    """Describe each term; optionally with dense ``[re, im]`` entries."""
    out = []
    for term in H.terms:
        entry = {"tag": term.kind, "index": term.index}
        if term.kind != "Prop":
            qubit, bad, clock = penalized_bit(term)
            entry.update(qubit=qubit, penalized_value=bad, clock=clock)
        if include_matrices:
            m = materialize_term(term)
            entry["matrix"] = [[[float(z.real), float(z.imag)] for z in row] for row in m]
        out.append(entry)
    return out

