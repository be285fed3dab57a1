"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  All functions are
pure; results are fresh arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import CapacityError, ContractError, NumericError, ShapeError

MAX_DIM = 4096
HERMITIAN_TOL = 1e-9
CLIP_TOL = 1e-10

Side = Literal["A", "B"]


def as_matrix(m, *, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} has non-finite entries")
    return arr


def check_capacity(dim: int, cap: int = MAX_DIM) -> None:
    if dim > cap:
        raise CapacityError(f"dimension {dim} exceeds cap {cap}")


def kron(a, b, *, cap: int = MAX_DIM) -> np.ndarray:
    a = as_matrix(a, name="a")
    b = as_matrix(b, name="b")
    check_capacity(max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), cap)
    return np.kron(a, b)


def partial_trace(m, dim_a: int, dim_b: int, keep: Side) -> np.ndarray:
    """Reduce an operator on A⊗B to the ``keep`` side."""
    m = as_matrix(m)
    n = dim_a * dim_b
    if m.shape != (n, n):
        raise ShapeError(f"expected ({n}, {n}) operator, got {m.shape}")
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise ShapeError(f"keep must be 'A' or 'B', got {keep!r}")


@dataclass(frozen=True)
class HermitianSpectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermiticity_defect(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def eigh(h) -> HermitianSpectrum:
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ShapeError(f"eigh needs a square matrix, got {h.shape}")
    if hermiticity_defect(h) > HERMITIAN_TOL:
        raise ContractError("matrix is not Hermitian within 1e-9")
    try:
        w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericError(str(exc)) from exc
    order = np.argsort(w)[::-1]
    return HermitianSpectrum(w[order], v[:, order])


def eigvalsh(h) -> np.ndarray:
    """Descending eigenvalues only (same contract as :func:`eigh`)."""
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ShapeError(f"eigvalsh needs a square matrix, got {h.shape}")
    if hermiticity_defect(h) > HERMITIAN_TOL:
        raise ContractError("matrix is not Hermitian within 1e-9")
    return np.linalg.eigvalsh(0.5 * (h + h.conj().T))[::-1]


def is_density_matrix(m, tol: float = 1e-8) -> bool:
    try:
        m = as_matrix(m)
    except (ShapeError, ContractError):
        return False
    if m.shape[0] != m.shape[1] or m.shape[0] == 0:
        return False
    if hermiticity_defect(m) > tol:
        return False
    if abs(np.trace(m) - 1) > tol:
        return False
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return bool(w.min() >= -tol)


def clip_spectrum(w: np.ndarray) -> np.ndarray:
    """Zero out PSD round-off; anything more negative than ``-CLIP_TOL`` is an error."""
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < -CLIP_TOL:
        raise NumericError(f"eigenvalue {w.min():.3e} below clipping threshold")
    return np.where(w < 0, 0.0, w)


def is_unitary(u, tol: float = 1e-8) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)
