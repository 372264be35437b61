"""Simulation of the randomized term-testing verifier.

One shot picks a slot ``y`` uniformly from ``1..M`` with ``M = T + K + 2``:

==============  ====================================
``y``           test
==============  ====================================
1               null test, always accepts
2 .. T+1        propagation test for step ``y - 1``
T+2 .. T+K+1    input check ``y - T - 1``
T+K+2           output check
==============  ====================================

Projector tests reject with the weight of the proof inside the penalized
subspace. The propagation test undoes the prefix unitaries on each clock
block (the rotation ``R = sum_t U_t...U_1 (x) |t><t|``) and rejects when the
clock is found along ``(|t> - |t-1>) / sqrt 2``. Averaged over slots, the
rejection probability is ``<psi|H|psi> / M``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ._validation import check_unit
from .circuit import Circuit, apply_gate, circuit_unitary
from .hamiltonian import (
    DENSE_CAP,
    CircuitHamiltonian,
    HamiltonianTerm,
    build_hamiltonian,
    energy,
    penalized_bit,
    _data_mask,
)

ACCEPT = "accept"
REJECT = "reject"

# shots per independent random stream in monte_carlo
CHUNK_SIZE = 1 << 16


@dataclass(frozen=True)
class TestSlot:
    """A resolved slot: ``kind`` is NullProp, Prop, InputCheck or OutputCheck."""

    __test__ = False  # not a pytest class

    y: int
    kind: str
    index: int | None = None

    @property
    def label(self) -> str:
        return self.kind if self.index is None else f"{self.kind}({self.index})"


@dataclass(frozen=True)
class VerifierTranscript:
    seed: int | None
    y: int
    slot: TestSlot
    outcome: str
    reject_probability: float
    note: str


def num_slots(T: int, K: int) -> int:
    return T + K + 2


def resolve_slot(y: int, T: int, K: int) -> TestSlot:
    M = num_slots(T, K)
    if not 1 <= y <= M:
        raise ValueError(f"slot y={y} outside [1, {M}]")
    if y == 1:
        return TestSlot(y, "NullProp")
    if y <= T + 1:
        return TestSlot(y, "Prop", y - 1)
    if y <= T + K + 1:
        return TestSlot(y, "InputCheck", y - T - 1)
    return TestSlot(y, "OutputCheck")


def sample_slot(rng: np.random.Generator, T: int, K: int) -> TestSlot:
    if T < 1 or K < 1:
        raise ValueError("T and K must be at least 1")
    y = int(rng.integers(1, num_slots(T, K) + 1))
    return resolve_slot(y, T, K)


def _check_proof(psi, circuit: Circuit) -> np.ndarray:
    dim = circuit.dim * (circuit.num_gates + 1)
    return check_unit(psi, dim, name="proof").reshape(circuit.num_gates + 1, circuit.dim)


def _projector_term(slot: TestSlot, circuit: Circuit, x: str) -> HamiltonianTerm:
    if slot.kind == "OutputCheck":
        return HamiltonianTerm("Out", None, circuit, x)
    if slot.kind == "InputCheck":
        kind = "In" if slot.index <= circuit.num_input_bits else "AncillaIn"
        return HamiltonianTerm(kind, slot.index, circuit, x)
    raise ValueError(f"{slot.label} is not a projector test")


def projector_hit_probability(psi, slot: TestSlot, circuit: Circuit, x: str) -> float:
    """Weight of the proof inside the slot's penalized basis subspace."""
    blocks = _check_proof(psi, circuit)
    qubit, bad, clock = penalized_bit(_projector_term(slot, circuit, x))
    mask = _data_mask(circuit.num_qubits, qubit, bad)
    return float(np.sum(np.abs(blocks[clock, mask]) ** 2))


def _undo_prefix(block: np.ndarray, circuit: Circuit, t: int) -> np.ndarray:
    # (U_t ... U_1)^dagger applied to one data block
    for gate in reversed(circuit.gates[:t]):
        block = apply_gate(block, gate.adjoint(), circuit.num_qubits)
    return block


def apply_rotation_adjoint(psi, circuit: Circuit) -> np.ndarray:
    """``R^dagger psi`` where ``R`` applies ``U_t...U_1`` on clock block ``t``."""
    blocks = _check_proof(psi, circuit)
    return np.array([_undo_prefix(b, circuit, t) for t, b in enumerate(blocks)]).reshape(-1)


def propagation_hit_probability(psi, t: int, circuit: Circuit) -> float:
    """Probability the rotated clock is found along ``(|t> - |t-1>)/sqrt 2``."""
    if not 1 <= t <= circuit.num_gates:
        raise ValueError(f"step t={t} outside [1, {circuit.num_gates}]")
    blocks = _check_proof(psi, circuit)
    rotated_now = _undo_prefix(blocks[t], circuit, t)
    rotated_prev = _undo_prefix(blocks[t - 1], circuit, t - 1)
    overlap = (rotated_now - rotated_prev) / np.sqrt(2)
    return float(np.vdot(overlap, overlap).real)


def slot_reject_probability(psi, slot: TestSlot, circuit: Circuit, x: str) -> float:
    if slot.kind == "NullProp":
        return 0.0
    if slot.kind == "Prop":
        return propagation_hit_probability(psi, slot.index, circuit)
    return projector_hit_probability(psi, slot, circuit, x)


def _threshold(p: float, rng: np.random.Generator) -> str:
    return REJECT if rng.random() < p else ACCEPT


def projective_test(psi, slot: TestSlot, circuit: Circuit, x: str, rng: np.random.Generator) -> str:
    """Standard-basis measurement of the penalized qubit and clock."""
    return _threshold(projector_hit_probability(psi, slot, circuit, x), rng)


def propagation_test(psi, t: int, circuit: Circuit, rng: np.random.Generator) -> str:
    return _threshold(propagation_hit_probability(psi, t, circuit), rng)


def slot_probabilities(H: CircuitHamiltonian, psi) -> np.ndarray:
    """Rejection probability of every slot ``y = 1..M`` (index ``y - 1``)."""
    M = num_slots(H.T, H.K)
    return np.array(
        [slot_reject_probability(psi, resolve_slot(y, H.T, H.K), H.circuit, H.x) for y in range(1, M + 1)]
    )


def shot_reject_probability(H: CircuitHamiltonian, psi) -> float:
    """Exact one-shot rejection probability, summed slot by slot."""
    probs = slot_probabilities(H, psi)
    return float(np.sum(probs) / len(probs))


def rejection_probability_exact(circuit: Circuit, x, psi, include_ancilla_checks: bool = True) -> float:
    """``<psi|H|psi> / (T + K + 2)``."""
    H = build_hamiltonian(circuit, x, include_ancilla_checks)
    return energy(H, psi) / num_slots(H.T, H.K)


def run_verifier(
    circuit: Circuit,
    x,
    psi,
    rng: np.random.Generator,
    include_ancilla_checks: bool = True,
    seed: int | None = None,
) -> VerifierTranscript:
    """One protocol shot: draw a slot, then perform its test."""
    H = build_hamiltonian(circuit, x, include_ancilla_checks)
    _check_proof(psi, circuit)
    slot = sample_slot(rng, H.T, H.K)
    if slot.kind == "NullProp":
        return VerifierTranscript(seed, slot.y, slot, ACCEPT, 0.0, "null slot")
    p = slot_reject_probability(psi, slot, circuit, H.x)
    outcome = _threshold(p, rng)
    note = "rotated clock measurement" if slot.kind == "Prop" else "standard-basis measurement"
    return VerifierTranscript(seed, slot.y, slot, outcome, p, note)


@dataclass(frozen=True)
class MonteCarloResult:
    samples: int
    seed: int
    rejections: int
    reject_rate: float
    stderr: float
    exact_probability: float
    slot_histogram: dict[str, int]
    transcript_digest: str

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "rejections": self.rejections,
            "reject_rate": self.reject_rate,
            "stderr": self.stderr,
            "exact_probability": self.exact_probability,
            "slot_histogram": dict(self.slot_histogram),
            "transcript_digest": self.transcript_digest,
        }


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, chunk]))


def monte_carlo(
    circuit: Circuit,
    x,
    psi,
    samples: int,
    seed: int,
    include_ancilla_checks: bool = True,
) -> MonteCarloResult:
    """Run ``samples`` independent shots and summarise them.

    Shot ``i`` draws its slot and its measurement variate from the stream
    seeded by ``(seed, i // CHUNK_SIZE)``, so results do not depend on how the
    chunks are scheduled.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    H = build_hamiltonian(circuit, x, include_ancilla_checks)
    probs = slot_probabilities(H, psi)
    M = len(probs)
    counts = np.zeros(M, dtype=np.int64)
    rejections = 0
    digest = hashlib.sha256()
    for chunk, start in enumerate(range(0, samples, CHUNK_SIZE)):
        size = min(CHUNK_SIZE, samples - start)
        rng = _chunk_rng(seed, chunk)
        ys = rng.integers(1, M + 1, size=size)
        us = rng.random(size)
        rejected = us < probs[ys - 1]
        counts += np.bincount(ys - 1, minlength=M)
        rejections += int(rejected.sum())
        digest.update(ys.astype("<u4").tobytes())
        digest.update(np.packbits(rejected).tobytes())
    rate = rejections / samples
    histogram = {resolve_slot(y, H.T, H.K).label: int(counts[y - 1]) for y in range(1, M + 1)}
    return MonteCarloResult(
        samples=samples,
        seed=seed,
        rejections=rejections,
        reject_rate=rate,
        stderr=float(np.sqrt(rate * (1 - rate) / samples)),
        exact_probability=float(np.sum(probs) / M),
        slot_histogram=histogram,
        transcript_digest=digest.hexdigest(),
    )


def rotation_matrix(circuit: Circuit) -> np.ndarray:
    """Dense block-diagonal ``R`` with block ``t`` equal to ``U_t ... U_1``."""
    T = circuit.num_gates
    dim = circuit.dim * (T + 1)
    if dim > DENSE_CAP:
        raise ValueError(f"dimension {dim} exceeds dense cap {DENSE_CAP}")
    R = np.zeros((dim, dim), dtype=complex)
    for t in range(T + 1):
        sl = slice(t * circuit.dim, (t + 1) * circuit.dim)
        R[sl, sl] = circuit_unitary(circuit, t)
    return R


def rotated_propagation_target(circuit: Circuit, t: int) -> np.ndarray:
    """``I (x) (|t> - |t-1>)(<t| - <t-1|) / 2`` as a dense matrix."""
    v = np.zeros(circuit.num_gates + 1)
    v[t], v[t - 1] = 1.0, -1.0
    return 0.5 * np.kron(np.outer(v, v), np.eye(circuit.dim)).astype(complex)
