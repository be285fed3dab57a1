"""Exact index algebra for (generalized) Bell pairs, Pauli strings and stabilizer codes.

A pair in state Φ_nm is tracked by its label ``(n, m)``: phase ``n`` and
amplitude shift ``m`` modulo ``d``.  Bilateral gates act on labels as affine
maps; local comparisons read off one index and consume the pair.  Every rule
here is checked against the matrix engine in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, ContractError, ShapeError
from .gates import PAULI_1Q

# Sign of the modular-sum power used on *both* sides in bilateral CSUM.
# Only matched powers map Bell products to Bell products; +1 (Bob applies the
# same SUM gate as Alice, not its inverse) is the convention that lets the
# computational-basis comparison on the target recover the amplitude index.
CSUM_POWER = 1


@dataclass(frozen=True, order=True)
class BellIndex:
    d: int
    n: int
    m: int

    def __post_init__(self):
        if self.d < 2:
            raise ConfigError(f"d must be >= 2, got {self.d}")
        if not (0 <= self.n < self.d and 0 <= self.m < self.d):
            raise ConfigError(f"Bell index ({self.n},{self.m}) out of range for d={self.d}")

    @property
    def label(self) -> tuple[int, int]:
        return (self.n, self.m)

    @property
    def bit_index(self) -> int:
        """Position in a qubit probability 4-vector (B1..B4) = phase + 2*amp."""
        if self.d != 2:
            raise ConfigError("bit_index is only defined for d=2")
        return self.n + 2 * self.m

    @classmethod
    def from_bit_index(cls, k: int) -> "BellIndex":
        if not 0 <= k < 4:
            raise ConfigError(f"qubit Bell index must be 0..3, got {k}")
        return cls(2, k & 1, k >> 1)


@dataclass(frozen=True)
class BellString:
    pairs: tuple[BellIndex, ...]

    def __post_init__(self):
        pairs = tuple(self.pairs)
        if not pairs:
            raise ConfigError("BellString must be nonempty")
        if len({p.d for p in pairs}) != 1:
            raise ConfigError("BellString needs a uniform d")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_labels(cls, d: int, labels: Iterable[tuple[int, int]]) -> "BellString":
        return cls(tuple(BellIndex(d, n, m) for n, m in labels))

    @classmethod
    def zeros(cls, d: int, k: int) -> "BellString":
        return cls((BellIndex(d, 0, 0),) * k)

    @property
    def d(self) -> int:
        return self.pairs[0].d

    @property
    def labels(self) -> tuple[tuple[int, int], ...]:
        return tuple(p.label for p in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def replace(self, j: int, idx: BellIndex) -> "BellString":
        return BellString(self.pairs[:j] + (idx,) + self.pairs[j + 1 :])


def _same_d(a: BellIndex, b: BellIndex) -> int:
    if a.d != b.d:
        raise ConfigError(f"d mismatch: {a.d} vs {b.d}")
    return a.d


def csum_d(source: BellIndex, target: BellIndex) -> tuple[BellIndex, BellIndex]:
    """Bilateral modular sum (source controls target on both sides).

    (n1, m1), (n2, m2) -> (n1 - s*n2, m1), (n2, m2 + s*m1) with s = CSUM_POWER.
    """
    d = _same_d(source, target)
    s = CSUM_POWER
    return (
        BellIndex(d, (source.n - s * target.n) % d, source.m),
        BellIndex(d, target.n, (target.m + s * source.m) % d),
    )


def bxor(source: BellIndex, target: BellIndex) -> tuple[BellIndex, BellIndex]:
    """Bilateral CNOT on qubit pairs: (a1,b1),(a2,b2) -> (a1^a2, b1), (a2, b1^b2)."""
    if source.d != 2 or target.d != 2:
        raise ConfigError("bxor needs d=2 pairs; use csum_d for qudits")
    return (
        BellIndex(2, source.n ^ target.n, source.m),
        BellIndex(2, target.n, source.m ^ target.m),
    )


def z_compare(pair: BellIndex) -> int:
    """Computational-basis comparison: Bob's outcome minus Alice's equals m."""
    return pair.m


def x_compare(pair: BellIndex) -> int:
    """Fourier-basis comparison: Alice's plus Bob's outcome equals n (mod d)."""
    return pair.n


def z_compare_rule(d: int, a: int, b: int) -> int:
    """Announced value from raw outcomes of a computational-basis comparison."""
    return (b - a) % d


def x_compare_rule(d: int, a: int, b: int) -> int:
    """Announced value from raw outcomes of a Fourier-basis comparison."""
    return (a + b) % d


def bilateral_hadamard(pair: BellIndex) -> BellIndex:
    """H on both sides swaps the two qubit indices: (n, m) -> (m, n)."""
    if pair.d != 2:
        raise ConfigError("bilateral_hadamard needs d=2")
    return BellIndex(2, pair.m, pair.n)


def bilateral_phase(pair: BellIndex) -> BellIndex:
    """S on Alice and S* on Bob: (n, m) -> (n ^ m, m)."""
    if pair.d != 2:
        raise ConfigError("bilateral_phase needs d=2")
    return BellIndex(2, pair.n ^ pair.m, pair.m)


# ----------------------------------------------------------------------
# Pauli strings and stabilizer codes
# ----------------------------------------------------------------------

_SYMBOLS = {"I": (0, 0), "X": (0, 1), "Z": (1, 0), "Y": (1, 1)}  # symbol -> (z, x)


@dataclass(frozen=True)
class PauliString:
    d: int
    z: tuple[int, ...]
    x: tuple[int, ...]

    def __post_init__(self):
        z, x = tuple(int(v) % self.d for v in self.z), tuple(int(v) % self.d for v in self.x)
        if len(z) != len(x):
            raise ShapeError("z and x parts must have equal length")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "x", x)

    @classmethod
    def from_symbols(cls, text: str) -> "PauliString":
        text = text.strip().upper()
        try:
            zx = [_SYMBOLS[c] for c in text]
        except KeyError as exc:
            raise ConfigError(f"bad Pauli symbol {exc} in {text!r}") from None
        return cls(2, tuple(a for a, _ in zx), tuple(b for _, b in zx))

    @classmethod
    def identity(cls, n: int, d: int = 2) -> "PauliString":
        return cls(d, (0,) * n, (0,) * n)

    @classmethod
    def single(cls, n: int, j: int, symbol: str) -> "PauliString":
        z, x = _SYMBOLS[symbol]
        zz, xx = [0] * n, [0] * n
        zz[j], xx[j] = z, x
        return cls(2, tuple(zz), tuple(xx))

    def __len__(self) -> int:
        return len(self.z)

    @property
    def weight(self) -> int:
        return sum(1 for a, b in zip(self.z, self.x) if a or b)

    @property
    def y_count(self) -> int:
        return sum(1 for a, b in zip(self.z, self.x) if a and b)

    def symbols(self) -> str:
        if self.d != 2:
            raise ConfigError("symbol form is for qubits")
        inv = {v: k for k, v in _SYMBOLS.items()}
        return "".join(inv[(a, b)] for a, b in zip(self.z, self.x))

    def __mul__(self, other: "PauliString") -> "PauliString":
        """Product up to phase (adds exponent vectors)."""
        _check_pair(self, other)
        return PauliString(
            self.d,
            tuple(a + b for a, b in zip(self.z, other.z)),
            tuple(a + b for a, b in zip(self.x, other.x)),
        )

    def matrix(self) -> np.ndarray:
        """Hermitian qubit matrix; each factor is i^{xz} X^x Z^z (so Y is the usual Y)."""
        if self.d != 2:
            raise ConfigError("matrix form implemented for qubits")
        out = np.array([[1.0 + 0j]])
        for s in self.symbols():
            out = np.kron(out, PAULI_1Q[s])
        return out


def _check_pair(p: PauliString, q: PauliString) -> None:
    if p.d != q.d or len(p) != len(q):
        raise ShapeError("Pauli strings must share d and length")


def symplectic(p: PauliString, q: PauliString) -> int:
    _check_pair(p, q)
    return sum(a * b - c * e for a, b, c, e in zip(p.z, q.x, p.x, q.z)) % p.d


def pauli_shift(e: PauliString, s: BellString) -> BellString:
    """Apply ``e`` to Bob's halves: its X part adds to m, its Z part to n."""
    if e.d != s.d or len(e) != len(s):
        raise ShapeError("Pauli string and Bell string must share d and length")
    d = s.d
    return BellString(
        tuple(BellIndex(d, (p.n + zj) % d, (p.m + xj) % d) for p, zj, xj in zip(s.pairs, e.z, e.x))
    )


def effective_error(s: BellString) -> PauliString:
    """The Bob-side Pauli string that produces ``s`` from the all-(0,0) string."""
    return PauliString(s.d, tuple(p.n for p in s.pairs), tuple(p.m for p in s.pairs))


def _gf2_rank(rows: Sequence[int]) -> int:
    basis: list[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
    return len(basis)


@dataclass(frozen=True)
class StabilizerCode:
    """Qubit stabilizer code: n physical, m = n - len(generators) logical qubits."""

    n: int
    generators: tuple[PauliString, ...]
    table: dict = field(default=None, compare=False)  # syndrome tuple -> PauliString
    name: str = ""

    def __post_init__(self):
        gens = tuple(self.generators)
        for g in gens:
            if g.d != 2 or len(g) != self.n:
                raise ShapeError("generators must be qubit Pauli strings of length n")
        for i, g in enumerate(gens):
            for h in gens[i + 1 :]:
                if symplectic(g, h):
                    raise ContractError(f"generators {g.symbols()} and {h.symbols()} anticommute")
        packed = [int("".join(map(str, g.z + g.x)) or "0", 2) for g in gens]
        if _gf2_rank(packed) != len(gens):
            raise ContractError("generators are not independent")
        object.__setattr__(self, "generators", gens)
        table = self.table if self.table is not None else build_syndrome_table(self.n, gens)
        seen = {}
        for syn, err in table.items():
            if self.syndrome_of(err, gens) != tuple(syn):
                raise ContractError(f"table entry {err.symbols()} has the wrong syndrome")
            if tuple(syn) in seen:
                raise ContractError("syndrome collision in correctable-error table")
            seen[tuple(syn)] = err
        if len(seen) != 2 ** len(gens):
            raise ContractError("correctable set must cover every syndrome")
        if seen.get((0,) * len(gens), PauliString.identity(self.n)).weight != 0:
            raise ContractError("zero syndrome must map to the identity error")
        object.__setattr__(self, "table", seen)

    @staticmethod
    def syndrome_of(err: PauliString, gens: Sequence[PauliString]) -> tuple[int, ...]:
        return tuple(symplectic(g, err) for g in gens)

    def syndrome(self, err: PauliString) -> tuple[int, ...]:
        return self.syndrome_of(err, self.generators)

    @property
    def m(self) -> int:
        return self.n - len(self.generators)

    @property
    def correctable(self) -> tuple[PauliString, ...]:
        return tuple(self.table[s] for s in sorted(self.table))

    def correction(self, syndrome: Sequence[int]) -> PauliString:
        try:
            return self.table[tuple(syndrome)]
        except KeyError:
            raise ConfigError(f"unknown syndrome {tuple(syndrome)}") from None

    @classmethod
    def from_text(cls, text: str, name: str = "") -> "StabilizerCode":
        """One generator per line: ``XZZXI`` or d-ary ``z1 z2 ... | x1 x2 ...``; '#' comments."""
        gens = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "|" in line:
                zs, xs = line.split("|")
                z = [int(v) for v in zs.split()]
                x = [int(v) for v in xs.split()]
                if any(v not in (0, 1) for v in z + x):
                    raise ConfigError("only qubit (d=2) stabilizer codes are supported")
                gens.append(PauliString(2, tuple(z), tuple(x)))
            else:
                gens.append(PauliString.from_symbols(line))
        if not gens:
            raise ConfigError("code file has no generators")
        n = len(gens[0])
        return cls(n, tuple(gens), name=name)

    @classmethod
    def builtin(cls, name: str) -> "StabilizerCode":
        if name.startswith("trivial"):
            n = int(name.split(":", 1)[1]) if ":" in name else 1
            return cls(n, (), name=name)
        fname = {"bitflip3": "bitflip3.txt", "five_qubit": "five_qubit.txt"}.get(name)
        if fname is None:
            raise ConfigError(f"unknown built-in code {name!r}")
        text = resources.files("locc_ledger").joinpath(f"data/{fname}").read_text()
        return cls.from_text(text, name=name)


def build_syndrome_table(n: int, gens: Sequence[PauliString]) -> dict:
    """First error (by weight, then qubit order, X<Y<Z) claiming each syndrome."""
    r = len(gens)
    table = {(0,) * r: PauliString.identity(n)}
    for w in range(1, n + 1):
        if len(table) == 2**r:
            break
        for qubits in combinations(range(n), w):
            for syms in product("XYZ", repeat=w):
                z, x = [0] * n, [0] * n
                for q, s in zip(qubits, syms):
                    z[q], x[q] = _SYMBOLS[s]
                err = PauliString(2, tuple(z), tuple(x))
                syn = StabilizerCode.syndrome_of(err, gens)
                table.setdefault(syn, err)
    if len(table) != 2**r:
        raise ContractError("could not find an error for every syndrome")
    return table


def bilateral_syndrome(code: StabilizerCode, s: BellString) -> tuple[int, ...]:
    """Per-generator difference of Bob's and Alice's outcomes (pairs not consumed).

    Alice measures each generator g and Bob its complex conjugate g*; the
    difference is the commutation value of g with the effective error.
    """
    if len(s) != code.n or s.d != 2:
        raise ShapeError("Bell string length must equal the code length (qubits)")
    return code.syndrome(effective_error(s))


# ----------------------------------------------------------------------
# recurrence
# ----------------------------------------------------------------------


def recurrence_map(p: Sequence[float]) -> tuple[np.ndarray, float]:
    """One bxor + z_compare round on two iid pairs; keep the source on outcome 0."""
    p = np.asarray(p, dtype=float)
    if p.shape != (4,) or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
        raise ConfigError(f"invalid Bell-diagonal weights {p}")
    out = np.zeros(4)
    for i, j in product(range(4), repeat=2):
        src, tgt = bxor(BellIndex.from_bit_index(i), BellIndex.from_bit_index(j))
        if z_compare(tgt) == 0:
            out[src.bit_index] += p[i] * p[j]
    success = float(out.sum())
    return out / success, success


# ----------------------------------------------------------------------
# index-level circuits
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Op:
    """One bilateral action: ``csum`` (source, target), ``z``/``x`` compare, ``h``/``s`` rotations."""

    kind: str
    pairs: tuple[int, ...]

    def __post_init__(self):
        arity = {"csum": 2, "z": 1, "x": 1, "h": 1, "s": 1}.get(self.kind)
        if arity is None:
            raise ConfigError(f"unknown op kind {self.kind!r}")
        if len(self.pairs) != arity or len(set(self.pairs)) != arity:
            raise ConfigError(f"op {self.kind} needs {arity} distinct pair indices")


def csum(s: int, t: int) -> Op:
    return Op("csum", (s, t))


def zc(j: int) -> Op:
    return Op("z", (j,))


def xc(j: int) -> Op:
    return Op("x", (j,))


@dataclass(frozen=True)
class IndexRun:
    final: tuple  # BellIndex or None (consumed) per pair
    transcript: tuple  # ((kind, pair, value), ...)


def run_ops(s: BellString, ops: Sequence[Op]) -> IndexRun:
    pairs: list = list(s.pairs)
    transcript = []
    for op in ops:
        idx = [pairs[j] if 0 <= j < len(pairs) else None for j in op.pairs]
        if any(p is None for p in idx):
            raise ConfigError(f"op {op} touches a consumed or missing pair")
        if op.kind == "csum":
            a, b = op.pairs
            pairs[a], pairs[b] = csum_d(pairs[a], pairs[b])
        elif op.kind == "h":
            pairs[op.pairs[0]] = bilateral_hadamard(idx[0])
        elif op.kind == "s":
            pairs[op.pairs[0]] = bilateral_phase(idx[0])
        else:
            (j,) = op.pairs
            value = z_compare(idx[0]) if op.kind == "z" else x_compare(idx[0])
            transcript.append((op.kind, j, value))
            pairs[j] = None
    return IndexRun(tuple(pairs), tuple(transcript))


def block_pairing(d: int = 3) -> dict[tuple[int, int], frozenset]:
    """Post-CSUM images of two identical copies, grouped by the source label.

    Returns {source label (n, m): set of target labels (n, m)} over all inputs.
    """
    out: dict[tuple[int, int], set] = {}
    for n, m in product(range(d), repeat=2):
        src, tgt = csum_d(BellIndex(d, n, m), BellIndex(d, n, m))
        out.setdefault(src.label, set()).add(tgt.label)
    return {k: frozenset(v) for k, v in out.items()}


def displayed_qutrit_pairing() -> dict[tuple[int, int], frozenset]:
    """The published qutrit image, read with display subscripts as (amp, phase).

    Display: Φ00 with {Φ0n}, Φ10 with {Φ2n}, Φ20 with {Φ1n}; converted here to
    (phase, amp) labels.
    """
    blocks = {(0, 0): 0, (1, 0): 2, (2, 0): 1}
    out = {}
    for (amp_s, ph_s), amp_t in blocks.items():
        out[(ph_s, amp_s)] = frozenset((ph_t, amp_t) for ph_t in range(3))
    return out
