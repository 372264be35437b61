"""Smallest eigenvalue of a clock Hamiltonian and promise-gap classification."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import eigh_tridiagonal

from ._validation import DimensionError
from .circuit import Circuit
from .hamiltonian import (
    DENSE_CAP,
    CircuitHamiltonian,
    apply_hamiltonian,
    build_hamiltonian,
    materialize_dense,
)

ZERO_TOL = 1e-9
RESIDUAL_TOL = 1e-8

COMPLETENESS_LIKE = "completeness_like"
SOUNDNESS_LIKE = "soundness_like"
VIOLATION = "violation"


class ConvergenceError(RuntimeError):
    """The iterative eigensolver did not reach the requested residual."""

    def __init__(self, message, iterations, residual):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


def soundness_bound(T: int) -> float:
    return 1 / (2 * (T + 1) ** 3)


def classify(lambda_min: float, bound: float, zero_tol: float = ZERO_TOL) -> str:
    if lambda_min <= zero_tol:
        return COMPLETENESS_LIKE
    if lambda_min >= bound:
        return SOUNDNESS_LIKE
    return VIOLATION


def residual_norm(H: CircuitHamiltonian, lam: float, vec: np.ndarray) -> float:
    return float(np.linalg.norm(apply_hamiltonian(H, vec) - lam * vec))


def min_eigenvalue_dense(H: CircuitHamiltonian) -> tuple[float, np.ndarray]:
    """Full diagonalization of the materialized matrix."""
    if H.dim > DENSE_CAP:
        raise DimensionError(f"dimension {H.dim} exceeds dense cap {DENSE_CAP}")
    matrix = materialize_dense(H)
    if not np.any(matrix.imag):
        # circuits of real gates give a real symmetric matrix
        matrix = matrix.real
    try:
        values, vectors = scipy.linalg.eigh(matrix, subset_by_index=[0, 0])
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"diagonalization failed: {exc}") from exc
    vec = vectors[:, 0].astype(complex)
    return float(values[0]), vec / np.linalg.norm(vec)


def min_eigenvalue_iterative(
    H: CircuitHamiltonian,
    tol: float = RESIDUAL_TOL,
    max_iter: int | None = None,
    seed: int = 0,
) -> tuple[float, np.ndarray, int]:
    """Lanczos with full reorthogonalization, using only matrix-vector products.

    Stops once the smallest Ritz pair has ``||H v - theta v|| <= tol``.
    Returns ``(lambda_min, eigvec, iterations)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    dim = H.dim
    max_iter = dim if max_iter is None else min(max_iter, dim)
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    q /= np.linalg.norm(q)

    basis = np.empty((max_iter, dim), dtype=complex)
    alphas, betas = [], []
    best_residual = np.inf
    for j in range(max_iter):
        basis[j] = q
        w = apply_hamiltonian(H, q)
        alpha = float(np.vdot(q, w).real)
        alphas.append(alpha)
        w -= alpha * q
        if j > 0:
            w -= betas[-1] * basis[j - 1]
        # two passes of classical Gram-Schmidt against the whole basis
        active = basis[: j + 1]
        for _ in range(2):
            w -= (w.conj() @ active.T).conj() @ active
        beta = float(np.linalg.norm(w))

        if j == 0:
            thetas, svecs = np.array([alpha]), np.ones((1, 1))
        else:
            thetas, svecs = eigh_tridiagonal(
                np.array(alphas), np.array(betas), select="i", select_range=(0, 0)
            )
        estimate = beta * abs(svecs[-1, 0])
        exhausted = beta < 1e-12 * max(1.0, abs(alpha)) or j + 1 == max_iter
        if estimate <= 0.1 * tol or exhausted:
            vec = svecs[:, 0] @ basis[: j + 1]
            vec /= np.linalg.norm(vec)
            lam = float(np.vdot(vec, apply_hamiltonian(H, vec)).real)
            residual = residual_norm(H, lam, vec)
            best_residual = min(best_residual, residual)
            if residual <= tol:
                return lam, vec, j + 1
            if exhausted:
                break
        betas.append(beta)
        q = w / beta
    raise ConvergenceError(
        f"Lanczos did not converge to residual {tol:g} in {j + 1} iterations "
        f"(best residual {best_residual:.3e})",
        iterations=j + 1,
        residual=best_residual,
    )


@dataclass(frozen=True)
class SpectralReport:
    lambda_min: float
    method: str
    iterations: int
    residual: float
    bound: float
    verdict: str
    S: int
    T: int
    n: int
    K: int
    include_ancilla_checks: bool
    zero_tol: float = ZERO_TOL
    eigvec: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def accepted(self) -> bool:
        return self.residual <= RESIDUAL_TOL

    def to_dict(self) -> dict:
        return {
            "lambda_min": self.lambda_min,
            "method": self.method,
            "iterations": self.iterations,
            "residual": self.residual,
            "bound": self.bound,
            "verdict": self.verdict,
            "zero_tol": self.zero_tol,
            "dims": {"S": self.S, "T": self.T, "n": self.n, "K": self.K},
            "include_ancilla_checks": self.include_ancilla_checks,
        }


def spectral_report(
    H: CircuitHamiltonian,
    method: str = "auto",
    tol: float = RESIDUAL_TOL,
    max_iter: int | None = None,
    seed: int = 0,
    zero_tol: float = ZERO_TOL,
) -> SpectralReport:
    if method == "auto":
        method = "dense" if H.dim <= DENSE_CAP else "iterative"
    if method == "dense":
        lam, vec = min_eigenvalue_dense(H)
        iterations = 1
    elif method == "iterative":
        lam, vec, iterations = min_eigenvalue_iterative(H, tol, max_iter, seed)
    else:
        raise ValueError(f"unknown method {method!r}")
    bound = soundness_bound(H.T)
    return SpectralReport(
        lambda_min=lam,
        method=method,
        iterations=iterations,
        residual=residual_norm(H, lam, vec),
        bound=bound,
        verdict=classify(lam, bound, zero_tol),
        S=H.S,
        T=H.T,
        n=H.n,
        K=H.K,
        include_ancilla_checks=H.include_ancilla_checks,
        zero_tol=zero_tol,
        eigvec=vec,
    )


def gap_report(
    circuit: Circuit,
    x,
    include_ancilla_checks: bool = True,
    method: str = "auto",
    tol: float = RESIDUAL_TOL,
    max_iter: int | None = None,
    seed: int = 0,
) -> SpectralReport:
    """Build the Hamiltonian for ``(circuit, x)`` and classify its ground energy."""
    H = build_hamiltonian(circuit, x, include_ancilla_checks)
    return spectral_report(H, method=method, tol=tol, max_iter=max_iter, seed=seed)
