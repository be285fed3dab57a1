"""Hashing and breeding on the index backend.

The hidden string of ``n`` qubit Bell pairs is drawn iid from ``p``.  Each
round picks a random subset of pairs and, per pair, a random check type
(amplitude, phase or their sum, realized with bilateral rotations), folds the
subset into one target pair with bilateral XORs and reads the target's
amplitude with ``z_compare``.  Hashing sacrifices a member of the subset;
breeding folds into a fresh known Φ00 pair.

Alongside the actual labels we track, for every live pair, which original bits
its phase and amplitude now equal (as bit masks), so each learned bit is a
known parity of the original string and the final labels follow from a decoded
string.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bell import BellIndex, bilateral_hadamard, bilateral_phase, bxor, z_compare
from .decode import ISD_ITERATIONS, ISD_PATIENCE, DecodeResult, ml_decode, pack_labels, parity
from .errors import ConfigError, ContractError, PremiseError
from .info import shannon
from .locc import Ledger, Register
from .protocols import ProtocolOutcome
from .sampling import make_rng

CHECK_TYPES = ("amp", "phase", "both")
WORKERS_ENV = "LOCC_LEDGER_WORKERS"


def rounds_for(n: int, p: Sequence[float], margin: int) -> int:
    h = shannon(p)
    return math.ceil(n * h - 1e-9) + margin


def check_premise(n: int, p: Sequence[float], margin: int) -> float:
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise ConfigError("p must be a probability 4-vector")
    h = shannon(p)
    if h >= 1:
        raise PremiseError(
            f"source entropy H(p) = {h:.4f} >= 1: parity checks would cost at least one pair per pair learned"
        )
    if n < 4:
        raise ConfigError(f"n must be >= 4, got {n}")
    if margin < 0:
        raise ConfigError(f"margin must be >= 0, got {margin}")
    return h


@dataclass
class _Tracker:
    """Actual labels plus the original-bit masks each label currently equals."""

    pairs: list
    rn: list
    rm: list

    @classmethod
    def start(cls, labels: Sequence[BellIndex]) -> "_Tracker":
        k = len(labels)
        return cls(list(labels), [1 << (2 * j) for j in range(k)], [1 << (2 * j + 1) for j in range(k)])

    def add_known(self) -> int:
        self.pairs.append(BellIndex(2, 0, 0))
        self.rn.append(0)
        self.rm.append(0)
        return len(self.pairs) - 1

    def rotate(self, j: int, kind: str) -> None:
        # make the amplitude index of pair j equal the requested combination
        if kind == "phase":
            self._h(j)
        elif kind == "both":
            self._s(j)
            self._h(j)
        elif kind != "amp":
            raise ConfigError(f"unknown check type {kind!r}")

    def _h(self, j):
        self.pairs[j] = bilateral_hadamard(self.pairs[j])
        self.rn[j], self.rm[j] = self.rm[j], self.rn[j]

    def _s(self, j):
        self.pairs[j] = bilateral_phase(self.pairs[j])
        self.rn[j] ^= self.rm[j]

    def fold(self, s: int, t: int) -> None:
        self.pairs[s], self.pairs[t] = bxor(self.pairs[s], self.pairs[t])
        self.rn[s] ^= self.rn[t]
        self.rm[t] ^= self.rm[s]

    def predicted(self, j: int, x: int) -> tuple[int, int]:
        return (parity(self.rn[j] & x), parity(self.rm[j] & x))


@dataclass(frozen=True)
class ParityTrial:
    kind: str
    n: int
    rounds: int
    rows: tuple[int, ...]
    bits: tuple[int, ...]
    truth: int
    kept: tuple[int, ...]  # indices of retained source pairs
    decode: DecodeResult | None
    identified: bool
    registers_identified: int
    extras: dict = field(default_factory=dict)


def _pick_subset(pool: Sequence[int], rng: np.random.Generator) -> list[int]:
    pool = list(pool)
    while True:
        mask = rng.random(len(pool)) < 0.5
        if mask.any():
            return [j for j, keep in zip(pool, mask) if keep]


def parity_trial(
    kind: str,
    n: int,
    p: Sequence[float],
    margin: int,
    rng: np.random.Generator,
    *,
    types: str = "mixed",
    decode: bool = True,
    method: str = "auto",
    iterations: int = ISD_ITERATIONS,
    patience: int | None = ISD_PATIENCE,
) -> ParityTrial:
    if kind not in ("hashing", "breeding"):
        raise ConfigError(f"unknown parity protocol {kind!r}")
    if types not in ("mixed", "single"):
        raise ConfigError("types must be 'mixed' or 'single'")
    check_premise(n, p, margin)
    R = rounds_for(n, p, margin)
    if kind == "hashing" and R >= n:
        raise PremiseError(f"hashing needs {R} sacrificial pairs but only {n} are available")
    p = np.asarray(p, dtype=float)
    hidden = [BellIndex.from_bit_index(int(k)) for k in rng.choice(4, size=n, p=p / p.sum())]
    truth = pack_labels([h.label for h in hidden])
    tr = _Tracker.start(hidden)
    live = list(range(n))
    rows, bits = [], []
    for _ in range(R):
        subset = _pick_subset(live, rng)
        if types == "mixed":
            kinds = [CHECK_TYPES[int(k)] for k in rng.integers(0, 3, len(subset))]
        else:
            kinds = [CHECK_TYPES[int(rng.integers(0, 2))]] * len(subset)
        for j, kd in zip(subset, kinds):
            tr.rotate(j, kd)
        if kind == "hashing":
            t = subset[int(rng.integers(len(subset)))]
            sources = [j for j in subset if j != t]
        else:
            t = tr.add_known()
            sources = subset
        for s in sources:
            tr.fold(s, t)
        bit = z_compare(tr.pairs[t])
        if bit != parity(tr.rm[t] & truth):
            raise ContractError("parity bookkeeping disagrees with the index algebra")
        rows.append(tr.rm[t])
        bits.append(bit)
        if kind == "hashing":
            live.remove(t)
    res = None
    identified = False
    reg_ok = 0
    if decode:
        res = ml_decode(rows, bits, n, p, rng, method=method, iterations=iterations, patience=patience)
        if res.best is not None:
            identified = res.best == truth
            reg_ok = sum(tr.predicted(j, res.best) == tr.pairs[j].label for j in live)
    return ParityTrial(kind, n, R, tuple(rows), tuple(bits), truth, tuple(live), res, identified, reg_ok)


def parity_ledger(trial: ParityTrial, p: Sequence[float]) -> Ledger:
    """Ledger with rounds explicit.

    I is min(bits learned, nH): the transcript has ``rounds`` binary outcomes
    (the public random choices are independent of the string) and cannot carry
    more than H(X) = nH bits.
    """
    n, R = trial.n, trial.rounds
    nh = n * shannon(p)
    info = min(float(R), nh)
    kept = len(trial.kept)
    pairs = n if trial.kind == "hashing" else n + R
    n_bits, e_i = 2.0 * pairs, float(pairs)
    e_f = float(kept)
    e_dist = float(kept) if trial.identified else 0.0
    regs = tuple(Register(((), trial.bits), "pair", 2, j, 1.0) for j in trial.kept) if trial.identified else ()
    return Ledger(
        n_bits=n_bits,
        E_i=e_i,
        E_f=e_f,
        I_A=0.0,
        I_B=info,
        I_total=info,
        E_distilled=e_dist,
        distribution=None,
        dims=(2**pairs, 2**pairs),
        step_entanglement=(e_i, e_f),
        registers=regs,
    )


def _outcome(trial: ParityTrial, p) -> ProtocolOutcome:
    ledger = parity_ledger(trial, p)
    extras = {
        "n": trial.n,
        "rounds": trial.rounds,
        "bits_learned": trial.rounds,
        "identified": trial.identified,
        "registers_identified": trial.registers_identified,
        "yield_per_copy": (trial.n - trial.rounds) / trial.n if trial.identified else 0.0,
        "ties": trial.decode.ties if trial.decode else None,
        "exact_decoder": trial.decode.exact if trial.decode else None,
    }
    return ProtocolOutcome(trial.kind, "index", ledger, {"string": trial.identified}, ledger.registers, extras)


def hashing(n: int, p, margin: int, seed: int, **kw) -> ProtocolOutcome:
    return _outcome(parity_trial("hashing", n, p, margin, make_rng(seed), **kw), p)


def breeding(n: int, p, margin: int, seed: int, **kw) -> ProtocolOutcome:
    return _outcome(parity_trial("breeding", n, p, margin, make_rng(seed), **kw), p)


def _one(args) -> ProtocolOutcome:
    kind, n, p, margin, seed, t, kw = args
    return _outcome(parity_trial(kind, n, p, margin, make_rng(seed, t), **kw), p)


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return default
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if w < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1")
    return w


def run_trials(
    kind: str, n: int, p, margin: int, trials: int, seed: int, workers: int | None = None, **kw
) -> list[ProtocolOutcome]:
    """Trial t uses substream (seed, t); results come back in trial order."""
    check_premise(n, p, margin)
    p = tuple(float(v) for v in p)
    jobs = [(kind, n, p, margin, seed, t, kw) for t in range(trials)]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or trials <= 1:
        return [_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_one, jobs, chunksize=max(1, trials // (4 * workers))))


@dataclass(frozen=True)
class TrialSummary:
    kind: str
    n: int
    margin: int
    trials: int
    rounds: int
    identification_rate: float
    mean_yield_per_copy: float
    target_yield: float  # 1 - H(p)
    gap: float
    worst_gap: float
    violations: int


def summarize(outcomes: Sequence[ProtocolOutcome], p) -> TrialSummary:
    if not outcomes:
        raise ConfigError("no trials to summarize")
    first = outcomes[0]
    n, rounds = first.extras["n"], first.extras["rounds"]
    gaps = [o.ledger.gap for o in outcomes]
    return TrialSummary(
        kind=first.name,
        n=n,
        margin=rounds - math.ceil(n * shannon(p) - 1e-9),
        trials=len(outcomes),
        rounds=rounds,
        identification_rate=float(np.mean([o.extras["identified"] for o in outcomes])),
        mean_yield_per_copy=float(np.mean([o.extras["yield_per_copy"] for o in outcomes])),
        target_yield=1 - shannon(p),
        gap=float(np.mean(gaps)),
        worst_gap=float(min(gaps)),
        violations=sum(1 for o in outcomes if o.ledger.violations()),
    )
