"""Maximum-likelihood decoding of an iid Bell string from learned parities.

A string of ``n`` qubit pairs is packed into an integer with bit ``2j`` the
phase and bit ``2j+1`` the amplitude index of pair ``j``.  Each learned bit is
``parity(row & x)``.  The decoder returns the most likely string consistent
with every parity, ties broken by lexicographic order of the label sequence.

Two strategies:

* ``exact``: enumerate the whole solution coset (feasible when the string has
  at most 64 bits and the null space has at most ``EXACT_MAX_NULLITY``
  dimensions);
* ``isd``: Lee-Brickell information-set decoding with random pair
  permutations, weight <= 2 on the free positions, run until a stretch of
  ``ISD_PATIENCE`` information sets brings no improvement.  Not guaranteed optimal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ConfigError

EXACT_MAX_NULLITY = 26
TIE_TOL = 1e-9
ISD_ITERATIONS = 30
ISD_PATIENCE = 60
_LOW_BITS = 20


@dataclass(frozen=True)
class DecodeResult:
    best: int | None  # packed string
    cost: float  # -log2 likelihood relative to the all-mode string
    ties: int  # number of strings at the optimal cost found
    exact: bool
    candidates: int  # strings scored


def label_costs(p: Sequence[float]) -> np.ndarray:
    """-log2 p(label) + log2 p(mode), indexed by phase + 2*amp; inf for impossible labels."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        c = -np.log2(p)
    return c - c.min()


def pack_labels(labels: Sequence[tuple[int, int]]) -> int:
    x = 0
    for j, (n, m) in enumerate(labels):
        x |= (n & 1) << (2 * j) | (m & 1) << (2 * j + 1)
    return x


def unpack_labels(x: int, n: int) -> tuple[tuple[int, int], ...]:
    return tuple(((x >> (2 * j)) & 1, (x >> (2 * j + 1)) & 1) for j in range(n))


def string_cost(x: int, n: int, costs: np.ndarray) -> float:
    return float(sum(costs[a + 2 * b] for a, b in unpack_labels(x, n)))


def parity(v: int) -> int:
    return v.bit_count() & 1


def solve_gf2(rows: Sequence[int], bits: Sequence[int], nbits: int) -> tuple[int, list[int]] | None:
    """Particular solution and null-space basis of ``parity(row & x) = bit``; None if inconsistent."""
    pivots: list[tuple[int, int, int]] = []  # (pivot bit, row, rhs)
    for r, b in zip(rows, bits):
        for pb, pr, prhs in pivots:
            if (r >> pb) & 1:
                r ^= pr
                b ^= prhs
        if r == 0:
            if b:
                return None
            continue
        pb = r.bit_length() - 1
        # keep the basis fully reduced
        pivots = [(q, qr ^ r, qrhs ^ b) if (qr >> pb) & 1 else (q, qr, qrhs) for q, qr, qrhs in pivots]
        pivots.append((pb, r, b))
    x0 = 0
    for pb, _, rhs in pivots:
        if rhs:
            x0 |= 1 << pb
    pivot_bits = {pb for pb, _, _ in pivots}
    null = []
    for f in range(nbits):
        if f in pivot_bits:
            continue
        v = 1 << f
        for pb, pr, _ in pivots:
            if (pr >> f) & 1:
                v |= 1 << pb
        null.append(v)
    return x0, null


def _lex_key(x: int, n: int):
    return unpack_labels(x, n)


def _byte_table(costs: np.ndarray) -> np.ndarray:
    t = np.zeros(256)
    for b in range(256):
        t[b] = sum(costs[(b >> (2 * q)) & 3] for q in range(4))
    return t


def decode_exact(rows: Sequence[int], bits: Sequence[int], n: int, costs: np.ndarray) -> DecodeResult:
    if 2 * n > 64:
        raise ConfigError("exact decoding packs strings into 64 bits (n <= 32)")
    sol = solve_gf2(rows, bits, 2 * n)
    if sol is None:
        return DecodeResult(None, float("inf"), 0, True, 0)
    x0, null = sol
    k = len(null)
    if k > EXACT_MAX_NULLITY:
        raise ConfigError(f"null space of dimension {k} is too large for exact enumeration")
    table = _byte_table(costs)
    nbytes = (2 * n + 7) // 8
    low, high = null[: min(k, _LOW_BITS)], null[min(k, _LOW_BITS) :]
    base = np.zeros(1, dtype=np.uint64)
    for v in low:
        base = np.concatenate([base, base ^ np.uint64(v)])
    best, best_set, scored = float("inf"), [], 0
    for h in range(2 ** len(high)):
        hv = x0
        for i, v in enumerate(high):
            if (h >> i) & 1:
                hv ^= v
        xs = base ^ np.uint64(hv)
        c = np.zeros(xs.size)
        for b in range(nbytes):
            c += table[((xs >> np.uint64(8 * b)) & np.uint64(255)).astype(np.intp)]
        scored += xs.size
        m = c.min()
        if not np.isfinite(m):
            continue
        if m < best - TIE_TOL:
            best, best_set = m, []
        if m <= best + TIE_TOL:
            best_set.extend(int(v) for v in xs[c <= best + TIE_TOL])
    if not best_set:
        return DecodeResult(None, float("inf"), 0, True, scored)
    chosen = min(best_set, key=lambda v: _lex_key(v, n))
    return DecodeResult(chosen, float(best), len(best_set), True, scored)


def _to_matrix(rows: Sequence[int], nbits: int) -> np.ndarray:
    nbytes = (nbits + 7) // 8
    buf = np.frombuffer(b"".join(r.to_bytes(nbytes, "little") for r in rows), dtype=np.uint8)
    return np.unpackbits(buf.reshape(len(rows), nbytes), axis=1, bitorder="little")[:, :nbits]


def _from_bits(v: np.ndarray) -> int:
    return int.from_bytes(np.packbits(v, bitorder="little").tobytes(), "little")


@lru_cache(maxsize=16)
def _pair_index(F: int) -> tuple[np.ndarray, np.ndarray]:
    i1, i2 = np.triu_indices(F, 1)
    return i1, i2


def _eliminate(A: np.ndarray) -> tuple[np.ndarray, list[int], int]:
    """Row-reduce the augmented GF(2) matrix in place; returns (A, pivot columns, rank)."""
    r, ncols = A.shape
    piv, row = [], 0
    for c in range(ncols - 1):
        if row == r:
            break
        nz = np.flatnonzero(A[row:, c])
        if nz.size == 0:
            continue
        kk = row + nz[0]
        if kk != row:
            A[[row, kk]] = A[[kk, row]]
        mask = A[:, c].astype(bool)
        mask[row] = False
        A[mask] ^= A[row]
        piv.append(c)
        row += 1
    return A, piv, row


def decode_isd(
    rows: Sequence[int],
    bits: Sequence[int],
    n: int,
    costs: np.ndarray,
    rng: np.random.Generator,
    iterations: int = ISD_ITERATIONS,
    patience: int | None = ISD_PATIENCE,
    max_iterations: int = 400,
) -> DecodeResult:
    """``iterations`` random information sets; with ``patience``, keep going
    until that many consecutive sets bring no improvement (up to ``max_iterations``)."""
    nbits = 2 * n
    if not rows:
        x = 0
        return DecodeResult(x, string_cost(x, n, costs), 1, False, 1)
    H = _to_matrix(rows, nbits)
    s = np.asarray(bits, dtype=np.uint8)
    table = _byte_table(costs)
    best, found, scored = float("inf"), set(), 0
    it = last_gain = 0
    while it < iterations or (patience is not None and it - last_gain < patience and it < max_iterations):
        it += 1
        perm = rng.permutation(n)
        cols = np.stack([2 * perm, 2 * perm + 1], 1).reshape(-1)
        A, piv, rank = _eliminate(np.concatenate([H[:, cols], s[:, None]], 1))
        if np.any(A[rank:, nbits]):
            return DecodeResult(None, float("inf"), 0, False, scored)
        free = np.setdiff1d(np.arange(nbits), piv)
        # candidates in permuted coordinates: the particular solution plus
        # every combination of at most two free columns
        base = np.zeros(nbits, dtype=np.uint8)
        base[piv] = A[:rank, nbits]
        E = np.zeros((free.size, nbits), dtype=np.uint8)
        E[np.arange(free.size), free] = 1
        E[:, piv] = A[:rank][:, free].T
        W1 = base ^ E
        i1, i2 = _pair_index(free.size)
        Xp = np.concatenate([base[None, :], W1, W1[i1] ^ E[i2]])
        c = table[np.packbits(Xp, axis=1, bitorder="little")].sum(1)
        scored += c.size
        m = c.min()
        if not np.isfinite(m):
            continue
        if m < best - TIE_TOL:
            best, found, last_gain = m, set(), it
        if m <= best + TIE_TOL:
            for k in np.flatnonzero(c <= best + TIE_TOL):
                x = np.zeros(nbits, dtype=np.uint8)
                x[cols] = Xp[k]
                found.add(_from_bits(x))
    if not found:
        return DecodeResult(None, float("inf"), 0, False, scored)
    chosen = min(found, key=lambda v: _lex_key(v, n))
    return DecodeResult(chosen, float(best), len(found), False, scored)


def ml_decode(
    rows: Sequence[int],
    bits: Sequence[int],
    n: int,
    p: Sequence[float],
    rng: np.random.Generator | None = None,
    *,
    method: str = "auto",
    iterations: int = ISD_ITERATIONS,
    patience: int | None = ISD_PATIENCE,
) -> DecodeResult:
    costs = label_costs(p)
    if method == "auto":
        if n <= 24:
            try:
                return decode_exact(rows, bits, n, costs)
            except ConfigError:
                pass
        method = "isd"
    if method == "exact":
        return decode_exact(rows, bits, n, costs)
    if method == "isd":
        rng = rng if rng is not None else np.random.default_rng(0)
        return decode_isd(rows, bits, n, costs, rng, iterations, patience)
    raise ConfigError(f"unknown decode method {method!r}")
