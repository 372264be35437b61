"""Input validation helpers shared by the public API."""

from __future__ import annotations

import numpy as np

NORM_TOL = 1e-10


class DimensionError(ValueError):
    """A vector or operator has the wrong size for the system it is used with."""


class NormError(ValueError):
    """A state that must be normalized is not."""


def check_bitstring(x, n: int) -> str:
    """Return ``x`` as a string of '0'/'1' characters of length ``n``.

    Accepts a string or any sequence of 0/1 integers.
    """
    if not isinstance(x, str):
        try:
            x = "".join(str(int(b)) for b in x)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"input must be a bitstring, got {x!r}") from exc
    if any(c not in "01" for c in x):
        raise ValueError(f"input must contain only 0 and 1, got {x!r}")
    if len(x) != n:
        raise ValueError(f"input has length {len(x)}, expected {n}")
    return x


def check_vector(psi, dim: int, *, name: str = "state") -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.shape[0] != dim:
        raise DimensionError(f"{name} has shape {psi.shape}, expected ({dim},)")
    return psi


def check_unit(psi, dim: int, *, name: str = "state", tol: float = NORM_TOL) -> np.ndarray:
    psi = check_vector(psi, dim, name=name)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise NormError(f"{name} has norm {norm:.3e}, expected 1")
    return psi
