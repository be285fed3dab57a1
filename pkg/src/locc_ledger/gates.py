"""Local operators on tensor factors of one side (matrix backend)."""

from __future__ import annotations

from math import prod
from typing import Sequence

import numpy as np

from .errors import ShapeError


def shift(d: int) -> np.ndarray:
    """X|j⟩ = |j+1⟩."""
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def clock(d: int) -> np.ndarray:
    """Z|j⟩ = ω^j |j⟩."""
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def fourier(d: int) -> np.ndarray:
    """Columns are the Fourier basis F|k⟩ = d^{-1/2} Σ_j ω^{jk} |j⟩."""
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)


def sum_gate(d: int, power: int = 1) -> np.ndarray:
    """Two-factor modular sum |j,k⟩ -> |j, k + power*j⟩ (control first)."""
    u = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        for k in range(d):
            u[j * d + (k + power * j) % d, j * d + k] = 1
    return u


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def phase_s() -> np.ndarray:
    return np.diag([1, 1j])


def on_factors(op: np.ndarray, targets: Sequence[int], factor_dims: Sequence[int]) -> np.ndarray:
    """Embed ``op`` acting on ``targets`` (in that order) into the full side space."""
    factor_dims = tuple(factor_dims)
    targets = list(targets)
    k = len(factor_dims)
    if len(set(targets)) != len(targets) or any(not 0 <= t < k for t in targets):
        raise ShapeError(f"bad target factors {targets} for {k} factors")
    tdims = [factor_dims[t] for t in targets]
    if op.shape != (prod(tdims), prod(tdims)):
        raise ShapeError(f"operator shape {op.shape} does not match target dims {tdims}")
    rest = [i for i in range(k) if i not in targets]
    rdim = prod(factor_dims[i] for i in rest)
    full = np.kron(op, np.eye(rdim, dtype=complex))
    # full acts on (targets..., rest...) ordering; permute to natural order
    order = targets + rest
    dims_perm = [factor_dims[i] for i in order]
    t = full.reshape(dims_perm + dims_perm)
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [k + i for i in inv])
    d = prod(factor_dims)
    return t.reshape(d, d)


def basis_projectors(bases: dict[int, np.ndarray], factor_dims: Sequence[int]) -> dict[tuple, np.ndarray]:
    """Rank-1 (per measured factor) projectors for a joint local basis measurement.

    ``bases`` maps factor index -> unitary whose columns are the basis vectors.
    Keys of the result are outcome tuples ordered by increasing factor index.
    """
    factor_dims = tuple(factor_dims)
    targets = sorted(bases)
    out: dict[tuple, np.ndarray] = {}
    for outcome in np.ndindex(*[factor_dims[t] for t in targets]):
        op = np.array([[1.0 + 0j]])
        for t, o in zip(targets, outcome):
            v = bases[t][:, o]
            op = np.kron(op, np.outer(v, v.conj()))
        out[tuple(int(o) for o in outcome)] = on_factors(op, targets, factor_dims)
    return out


PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
