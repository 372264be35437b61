"""scikit-learn style wrappers around the gap certifier and the verifier."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_bitstring, check_unit
from .circuit import Circuit
from .hamiltonian import build_hamiltonian
from .spectral import RESIDUAL_TOL, ZERO_TOL, spectral_report
from .verifier import ACCEPT, REJECT, slot_probabilities


def _check_inputs(X, n: int) -> list[str]:
    if isinstance(X, str):
        X = [X]
    return [check_bitstring(x, n) for x in X]


class GapEstimator(TransformerMixin, BaseEstimator):
    """Ground energy of the clock Hamiltonian for each input of a fixed circuit.

    ``transform`` maps a list of input bitstrings to a column of ``lambda_min``
    values; ``predict`` maps them to verdict labels.

    Examples
    --------
    >>> from clockgap.revcomp import STANDARD_TABLES, compile_truth_table
    >>> circ = compile_truth_table(STANDARD_TABLES["and"]).circuit
    >>> GapEstimator(circuit=circ).fit(["00", "11"]).predict(["11"])
    array(['completeness_like'], dtype='<U17')
    """

    def __init__(
        self,
        circuit: Circuit | None = None,
        include_ancilla_checks=True,
        method="auto",
        tol=RESIDUAL_TOL,
        max_iter=None,
        zero_tol=ZERO_TOL,
        random_state=0,
    ):
        self.circuit = circuit
        self.include_ancilla_checks = include_ancilla_checks
        self.method = method
        self.tol = tol
        self.max_iter = max_iter
        self.zero_tol = zero_tol
        self.random_state = random_state

    def _report(self, x):
        H = build_hamiltonian(self.circuit, x, self.include_ancilla_checks)
        return spectral_report(
            H,
            method=self.method,
            tol=self.tol,
            max_iter=self.max_iter,
            seed=self.random_state,
            zero_tol=self.zero_tol,
        )

    def fit(self, X, y=None):
        if not isinstance(self.circuit, Circuit):
            raise TypeError("circuit must be a Circuit")
        inputs = _check_inputs(X, self.circuit.num_input_bits)
        self.n_features_in_ = self.circuit.num_input_bits
        self.reports_ = {x: self._report(x) for x in inputs}
        return self

    def _reports_for(self, X):
        check_is_fitted(self, "reports_")
        inputs = _check_inputs(X, self.n_features_in_)
        for x in inputs:
            if x not in self.reports_:
                self.reports_[x] = self._report(x)
        return [self.reports_[x] for x in inputs]

    def transform(self, X):
        return np.array([[r.lambda_min] for r in self._reports_for(X)])

    def predict(self, X):
        return np.array([r.verdict for r in self._reports_for(X)])


class VerifierEstimator(BaseEstimator):
    """Acceptance statistics of the randomized verifier for one instance.

    Rows of the proof matrix passed to ``predict_proba`` / ``predict`` are
    unit clocked states.
    """

    def __init__(self, circuit: Circuit | None = None, x=None, include_ancilla_checks=True, random_state=0):
        self.circuit = circuit
        self.x = x
        self.include_ancilla_checks = include_ancilla_checks
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if not isinstance(self.circuit, Circuit):
            raise TypeError("circuit must be a Circuit")
        self.hamiltonian_ = build_hamiltonian(self.circuit, self.x, self.include_ancilla_checks)
        self.n_slots_ = self.hamiltonian_.T + self.hamiltonian_.K + 2
        self.classes_ = np.array([ACCEPT, REJECT])
        return self

    def _proofs(self, X):
        check_is_fitted(self, "hamiltonian_")
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        return [check_unit(row, self.hamiltonian_.dim, name="proof") for row in X]

    def predict_proba(self, X):
        """Columns ``[P(accept), P(reject)]`` for one protocol shot per proof."""
        reject = np.array(
            [np.mean(slot_probabilities(self.hamiltonian_, psi)) for psi in self._proofs(X)]
        )
        return np.column_stack([1 - reject, reject])

    def predict(self, X):
        """One simulated shot per proof."""
        proofs = self._proofs(X)
        rng = np.random.default_rng(self.random_state)
        out = []
        for psi in proofs:
            probs = slot_probabilities(self.hamiltonian_, psi)
            y = rng.integers(1, self.n_slots_ + 1)
            out.append(REJECT if rng.random() < probs[y - 1] else ACCEPT)
        return np.array(out)
