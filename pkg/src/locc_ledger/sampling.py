"""Seeded randomness: per-trial substreams, Haar draws, random ensembles and protocols.

Every generator is ``numpy.random.Generator(PCG64(...))`` seeded from a
``SeedSequence`` whose spawn key is the trial index, so trial ``t`` of seed
``s`` is the same stream regardless of how trials are scheduled.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .locc import AliceMeasure, BobMeasure, Instrument, LocalUnitary, OneWayProtocol
from .states import BipartiteDims, Ensemble, PureState


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    if seed < 0:
        raise ConfigError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return make_rng(int(seed_or_rng))


def haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random isometry (rows >= cols) via QR with the phase fix."""
    z = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return haar_isometry(dim, dim, rng)


def random_instrument(dim: int, outcomes: int, seed, side: str = "A") -> Instrument:
    if outcomes < 1:
        raise ConfigError("an instrument needs at least one outcome")
    rng = _as_rng(seed)
    v = haar_isometry(outcomes * dim, dim, rng)
    return Instrument(tuple(v[k * dim : (k + 1) * dim] for k in range(outcomes)), side)


def random_pure_ensemble(dims: BipartiteDims, size: int, seed) -> Ensemble:
    if size < 1:
        raise ConfigError("ensemble size must be >= 1")
    rng = _as_rng(seed)
    probs = rng.dirichlet(np.ones(size)) if size > 1 else np.ones(1)
    items = []
    for p in probs:
        v = rng.standard_normal(dims.total) + 1j * rng.standard_normal(dims.total)
        items.append((float(p), PureState(v / np.linalg.norm(v), dims)))
    # dirichlet output sums to 1 only up to rounding
    total = sum(p for p, _ in items)
    return Ensemble(tuple((p / total, s) for p, s in items))


def random_protocol(dims: BipartiteDims, seed, *, max_outcomes: int = 3) -> OneWayProtocol:
    """Random local unitaries, one Alice instrument, then Bob instruments keyed by her outcome."""
    rng = _as_rng(seed)
    steps = []
    if rng.random() < 0.5:
        steps.append(LocalUnitary(haar_unitary(dims.dA, rng), haar_unitary(dims.dB, rng)))
    ka = int(rng.integers(1, max_outcomes + 1))
    steps.append(AliceMeasure(random_instrument(dims.dA, ka, rng, "A")))
    if rng.random() < 0.5:
        steps.append(LocalUnitary(None, haar_unitary(dims.dB, rng)))
    table = {
        (a,): random_instrument(dims.dB, int(rng.integers(1, max_outcomes + 1)), rng, "B") for a in range(ka)
    }
    steps.append(BobMeasure(lambda t, table=table: table[t[0]]))
    return OneWayProtocol(tuple(steps))

