"""Randomized check of the one-way ledger bound over random ensembles and protocols."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .errors import CapacityError, ConfigError
from .locc import LEDGER_TOL, Ledger, holevo_chain_audit, run_protocol
from .sampling import make_rng, random_protocol, random_pure_ensemble
from .states import BipartiteDims

# Monte Carlo sweeps run many trials; keep each one small.
SWEEP_MAX_DIM = 1024
MAX_ENSEMBLE = 4


@dataclass(frozen=True)
class BoundCheck:
    trial: int
    dims: tuple[int, int]
    ledger: Ledger
    ledger_violations: tuple[str, ...]
    chain_violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not (self.ledger_violations or self.chain_violations)


def parse_dims(spec) -> list[tuple[int, int]]:
    """``"2,3,4"`` (all ordered pairs) or ``"2x3,4x4"``; lists of pairs pass through."""
    if isinstance(spec, str):
        parts = [s.strip() for s in spec.split(",") if s.strip()]
        if not parts:
            raise ConfigError("empty dims list")
        try:
            if all("x" in s for s in parts):
                out = [tuple(int(v) for v in s.split("x")) for s in parts]
            elif any("x" in s for s in parts):
                raise ConfigError("mix of 'AxB' and single dimensions in dims list")
            else:
                ds = [int(s) for s in parts]
                out = [(a, b) for a in ds for b in ds]
        except ValueError:
            raise ConfigError(f"cannot parse dims {spec!r}") from None
    else:
        out = [tuple(int(v) for v in pair) for pair in spec]
    for pair in out:
        if len(pair) != 2 or min(pair) < 1:
            raise ConfigError(f"bad dims entry {pair}")
        if pair[0] * pair[1] > SWEEP_MAX_DIM:
            raise CapacityError(f"dims {pair[0]}x{pair[1]} exceed the sweep cap of {SWEEP_MAX_DIM}")
    return out


def bound_trial(dims: tuple[int, int], seed: int, trial: int) -> BoundCheck:
    rng = make_rng(seed, trial)
    bd = BipartiteDims(*dims)
    e = random_pure_ensemble(bd, int(rng.integers(1, MAX_ENSEMBLE + 1)), rng)
    p = random_protocol(bd, rng)
    ledger = run_protocol(e, p, check=False)
    audit = holevo_chain_audit(e, p, LEDGER_TOL)
    return BoundCheck(trial, tuple(dims), ledger, tuple(ledger.violations()), audit.violations)


def _job(args) -> BoundCheck:
    return bound_trial(*args)


def verify_bound(trials: int, dims: Sequence, seed: int, workers: int = 1) -> list[BoundCheck]:
    if trials < 0:
        raise ConfigError("trials must be >= 0")
    dims = parse_dims(dims)
    jobs = [(dims[t % len(dims)], seed, t) for t in range(trials)]
    if workers <= 1 or trials <= 1:
        return [_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_job, jobs, chunksize=max(1, trials // (4 * workers))))
