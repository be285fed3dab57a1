"""Bipartite states, (generalized) Bell constructors and ensembles.

Subsystem ordering is fixed everywhere: for a state made of k pairs the
amplitude index is ``(a_1 ... a_k, b_1 ... b_k)`` -- all of Alice's factors
first, then all of Bob's, each group in pair order.

Bell labels are ``(phase, amp)`` pairs ``(n, m)`` with

    |Φ_nm⟩ = d^{-1/2} Σ_j ω^{jn} |j⟩ ⊗ |j+m mod d⟩,   ω = exp(2πi/d).

The four qubit Bell states B1..B4 are (0,0), (1,0), (0,1), (1,1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import CapacityError, ConfigError, ShapeError
from .linalg import MAX_DIM, is_density_matrix

NORM_TOL = 1e-9
PROB_TOL = 1e-9

BELL_LABELS = {1: (0, 0), 2: (1, 0), 3: (0, 1), 4: (1, 1)}


@dataclass(frozen=True)
class BipartiteDims:
    """Local dimensions, optionally split into tensor factors (pairs)."""

    dA: int
    dB: int
    a_factors: tuple[int, ...] = ()
    b_factors: tuple[int, ...] = ()

    def __post_init__(self):
        if self.dA < 1 or self.dB < 1:
            raise ConfigError(f"dimensions must be >= 1, got {self.dA}x{self.dB}")
        if self.dA * self.dB > MAX_DIM:
            raise CapacityError(f"total dimension {self.dA * self.dB} exceeds cap {MAX_DIM}")
        if not self.a_factors:
            object.__setattr__(self, "a_factors", (self.dA,))
        if not self.b_factors:
            object.__setattr__(self, "b_factors", (self.dB,))
        if prod(self.a_factors) != self.dA or prod(self.b_factors) != self.dB:
            raise ShapeError("factor dimensions do not multiply to the side dimension")

    @classmethod
    def pairs(cls, d: int, k: int) -> "BipartiteDims":
        return cls(d**k, d**k, (d,) * k, (d,) * k)

    @property
    def total(self) -> int:
        return self.dA * self.dB

    @property
    def n_bits(self) -> float:
        return float(np.log2(self.dA * self.dB))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    dims: BipartiteDims

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size != self.dims.total:
            raise ShapeError(f"{amps.size} amplitudes for dims {self.dims.dA}x{self.dims.dB}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1) > NORM_TOL:
            raise ConfigError(f"state not normalized (squared norm {norm})")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def matrix(self) -> np.ndarray:
        """Amplitudes as a dA x dB coefficient matrix."""
        return self.amplitudes.reshape(self.dims.dA, self.dims.dB)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "PureState") -> float:
        return abs(self.overlap(other)) ** 2

    def equals_up_to_phase(self, other: "PureState", tol: float = 1e-9) -> bool:
        return self.dims == other.dims and self.fidelity(other) >= 1 - tol


@dataclass(frozen=True, eq=False)
class MixedState:
    matrix: np.ndarray
    dims: BipartiteDims

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.shape != (self.dims.total, self.dims.total):
            raise ShapeError(f"matrix shape {m.shape} does not match dims")
        if not is_density_matrix(m, 1e-8):
            raise ConfigError("matrix is not a density matrix within 1e-8")
        object.__setattr__(self, "matrix", m)

    def density(self) -> np.ndarray:
        return self.matrix


State = Union[PureState, MixedState]


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Source preparation {p_x, ρ_x}; ``labels`` name the items (default 0..N-1)."""

    items: tuple[tuple[float, State], ...]
    labels: tuple = field(default=())

    def __post_init__(self):
        items = tuple((float(p), s) for p, s in self.items)
        if not items:
            raise ConfigError("ensemble must be nonempty")
        probs = np.array([p for p, _ in items])
        if np.any(probs < 0) or abs(probs.sum() - 1) > PROB_TOL:
            raise ConfigError("ensemble probabilities must be >= 0 and sum to 1")
        dims = items[0][1].dims
        if any(s.dims != dims for _, s in items):
            raise ShapeError("all ensemble states must share dims")
        labels = tuple(self.labels) if self.labels else tuple(range(len(items)))
        if len(labels) != len(items) or len(set(labels)) != len(labels):
            raise ConfigError("labels must be distinct, one per item")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "labels", labels)

    @property
    def dims(self) -> BipartiteDims:
        return self.items[0][1].dims

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for p, _ in self.items])

    @property
    def states(self) -> list[State]:
        return [s for _, s in self.items]

    @property
    def is_pure(self) -> bool:
        return all(isinstance(s, PureState) for _, s in self.items)

    def average(self) -> np.ndarray:
        return sum(p * s.density() for p, s in self.items)

    def __len__(self) -> int:
        return len(self.items)


# ----------------------------------------------------------------------
# constructors
# ----------------------------------------------------------------------


def gen_bell(d: int, n: int, m: int) -> PureState:
    if d < 2:
        raise ConfigError(f"d must be >= 2, got {d}")
    if not (0 <= n < d and 0 <= m < d):
        raise ConfigError(f"Bell index ({n},{m}) out of range for d={d}")
    amps = np.zeros(d * d, dtype=complex)
    j = np.arange(d)
    amps[j * d + (j + m) % d] = np.exp(2j * np.pi * j * n / d) / np.sqrt(d)
    return PureState(amps, BipartiteDims(d, d))


def bell(x: int) -> PureState:
    """Qubit Bell state B_x, x in 1..4."""
    if x not in BELL_LABELS:
        raise ConfigError(f"Bell index must be 1..4, got {x}")
    return gen_bell(2, *BELL_LABELS[x])


def product_state(local_a: Sequence[complex], local_b: Sequence[complex]) -> PureState:
    a = np.asarray(local_a, dtype=complex)
    b = np.asarray(local_b, dtype=complex)
    return PureState(np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b)), BipartiteDims(a.size, b.size))


def canonical_product(states: Sequence[PureState]) -> PureState:
    """Tensor product of bipartite states, reordered to A_1..A_k | B_1..B_k."""
    if not states:
        raise ConfigError("need at least one state")
    a_f: list[int] = []
    b_f: list[int] = []
    for s in states:
        a_f.extend(s.dims.a_factors)
        b_f.extend(s.dims.b_factors)
    dA, dB = prod(a_f), prod(b_f)
    if dA * dB > MAX_DIM:
        raise CapacityError(f"product dimension {dA * dB} exceeds cap {MAX_DIM}")
    t = states[0].matrix
    for s in states[1:]:
        # t: (A..., B...) as matrix (dA_so_far, dB_so_far); s: (a, b)
        t = np.einsum("ij,kl->ikjl", t, s.matrix).reshape(t.shape[0] * s.dims.dA, t.shape[1] * s.dims.dB)
    return PureState(t.ravel(), BipartiteDims(dA, dB, tuple(a_f), tuple(b_f)))


def tensor_power_canonical(s: PureState, k: int) -> PureState:
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if s.dims.total**k > MAX_DIM:
        raise CapacityError(f"{k} copies exceed dimension cap {MAX_DIM}")
    return canonical_product([s] * k)


def bell_string_state(d: int, labels: Iterable[tuple[int, int]]) -> PureState:
    """Canonical product of generalized Bell pairs with the given (n, m) labels."""
    return canonical_product([gen_bell(d, n, m) for n, m in labels])


def uniform_bell_ensemble(d: int, copies: int) -> Ensemble:
    labels = [(n, m) for n in range(d) for m in range(d)]
    if (d * d) ** copies > MAX_DIM:
        raise CapacityError(f"{copies} copies of a {d}x{d} pair exceed dimension cap")
    p = 1.0 / len(labels)
    return Ensemble(
        tuple((p, tensor_power_canonical(gen_bell(d, n, m), copies)) for n, m in labels),
        tuple(labels),
    )


def bell_diagonal(p: Sequence[float]) -> MixedState:
    p = np.asarray(p, dtype=float)
    if p.shape != (4,) or np.any(p < 0) or abs(p.sum() - 1) > PROB_TOL:
        raise ConfigError(f"invalid Bell-diagonal weights {p}")
    rho = sum(w * bell(x + 1).density() for x, w in enumerate(p))
    return MixedState(rho, BipartiteDims(2, 2))


# ----------------------------------------------------------------------
# config serialization
# ----------------------------------------------------------------------

CONSTRUCTORS = {"uniform_bell_ensemble": uniform_bell_ensemble}


def _label_out(x):
    return list(x) if isinstance(x, tuple) else x


def _label_in(x):
    return tuple(x) if isinstance(x, list) else x


def ensemble_to_config(e: Ensemble) -> dict:
    """Explicit JSON-compatible form; amplitudes as separate real/imaginary lists."""
    if not e.is_pure:
        raise ConfigError("only pure-component ensembles serialize")
    d = e.dims
    return {
        "dims": {"dA": d.dA, "dB": d.dB, "a_factors": list(d.a_factors), "b_factors": list(d.b_factors)},
        "items": [
            {"p": p, "label": _label_out(lab), "re": s.amplitudes.real.tolist(), "im": s.amplitudes.imag.tolist()}
            for (p, s), lab in zip(e.items, e.labels)
        ],
    }


def ensemble_from_config(cfg: dict) -> Ensemble:
    """Inverse of :func:`ensemble_to_config`; also accepts ``{"constructor": name, "params": {...}}``."""
    if not isinstance(cfg, dict):
        raise ConfigError("ensemble config must be an object")
    if "constructor" in cfg:
        name = cfg["constructor"]
        if name not in CONSTRUCTORS:
            raise ConfigError(f"unknown ensemble constructor {name!r}")
        try:
            return CONSTRUCTORS[name](**cfg.get("params", {}))
        except TypeError as exc:
            raise ConfigError(f"bad parameters for {name}: {exc}") from None
    try:
        dd = cfg["dims"]
        dims = BipartiteDims(
            int(dd["dA"]), int(dd["dB"]), tuple(dd.get("a_factors", ())), tuple(dd.get("b_factors", ()))
        )
        items, labels = [], []
        for it in cfg["items"]:
            amps = np.asarray(it["re"], dtype=float) + 1j * np.asarray(it.get("im", 0.0), dtype=float)
            items.append((float(it["p"]), PureState(amps, dims)))
            if "label" in it:
                labels.append(_label_in(it["label"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed ensemble config: {exc!r}") from None
    if labels and len(labels) != len(items):
        raise ConfigError("either every ensemble item has a label or none does")
    return Ensemble(tuple(items), tuple(labels))
