"""Independent full-matrix constructions used as test oracles.

Nothing here imports the package: states are built straight from the
generalized Bell formula and gates act by explicit index arithmetic.
"""

from __future__ import annotations

import itertools

import numpy as np


def bell_tensor(d, n, m):
    """|Φ_nm⟩ as a d x d amplitude array [a, b]."""
    w = np.exp(2j * np.pi / d)
    t = np.zeros((d, d), dtype=complex)
    for j in range(d):
        t[j, (j + m) % d] = w ** (j * n)
    return t / np.sqrt(d)


def string_tensor(d, labels):
    """Product of pairs, axes ordered (a_1..a_k, b_1..b_k)."""
    k = len(labels)
    t = np.ones((), dtype=complex)
    for n, m in labels:
        t = np.multiply.outer(t, bell_tensor(d, n, m))
    # outer product gives (a1, b1, a2, b2, ...): regroup
    order = [2 * i for i in range(k)] + [2 * i + 1 for i in range(k)]
    return t.transpose(order)


def identify(d, t, k, tol=1e-9):
    """Return the unique Bell string label tuple whose state matches ``t`` up to phase."""
    hits = []
    for labels in itertools.product(itertools.product(range(d), repeat=2), repeat=k):
        f = abs(np.vdot(string_tensor(d, labels).ravel(), t.ravel())) ** 2
        if f > tol:
            hits.append((labels, f))
    assert len(hits) == 1, hits
    return hits[0]


def bilateral_csum(d, t, s, tgt, power=1):
    """|a_s, a_t⟩ -> |a_s, a_t + power*a_s⟩ on both sides of a k-pair tensor."""
    k = t.ndim // 2
    out = np.zeros_like(t)
    for idx in np.ndindex(*t.shape):
        new = list(idx)
        new[tgt] = (idx[tgt] + power * idx[s]) % d
        new[k + tgt] = (idx[k + tgt] + power * idx[k + s]) % d
        out[tuple(new)] = t[idx]
    return out


def apply_local(t, op, axis):
    """Apply a single-factor operator on the given tensor axis."""
    return np.moveaxis(np.tensordot(op, t, axes=([1], [axis])), 0, axis)


def single_pair_outcomes(d, n, m, basis):
    """Joint (a, b) probabilities for both halves measured in ``basis`` (columns)."""
    amp = basis.conj().T @ bell_tensor(d, n, m) @ basis.conj()
    return np.abs(amp) ** 2


def fourier(d):
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)


def x_gate(d):
    return np.roll(np.eye(d), 1, axis=0)


def z_gate(d):
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
S = np.diag([1, 1j])
