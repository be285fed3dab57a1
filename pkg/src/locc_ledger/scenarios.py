"""Scenario definitions, the built-in catalogue and execution into report rows."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import protocols as P
from .bell import StabilizerCode
from .errors import ConfigError, LedgerViolation
from .hashing import run_trials, worker_count
from .gates import fourier
from .locc import AliceMeasure, BobMeasure, Instrument, Ledger, OneWayProtocol, run_protocol
from .protocols import ProtocolOutcome
from .sampling import make_rng, random_protocol, random_pure_ensemble
from .states import BipartiteDims, ensemble_from_config
from .sweep import verify_bound

BACKENDS = ("matrix", "index")
ENSEMBLE_PROTOCOLS = ("random_protocol", "computational", "fourier")
SATURATION_TOL = 1e-6

COLUMNS = (
    "scenario",
    "trial",
    "backend",
    "d1",
    "d2",
    "n_bits",
    "E_i",
    "I_A",
    "I_B",
    "I_total",
    "E_f",
    "E_distilled",
    "gap",
    "saturated",
    "seed",
    "runtime",
)


@dataclass(frozen=True)
class ReportRow:
    scenario: str
    trial: str  # trial index or "aggregate"
    backend: str
    d1: int
    d2: int
    n_bits: float
    E_i: float
    I_A: float
    I_B: float
    I_total: float
    E_f: float
    E_distilled: float
    gap: float
    saturated: bool
    seed: int
    runtime: float | None = None
    transcripts: list | None = field(default=None, compare=False)

    @classmethod
    def from_ledger(cls, scenario, trial, backend, ledger: Ledger, seed, runtime=None, transcripts=None):
        return cls(
            scenario,
            str(trial),
            backend,
            int(ledger.dims[0]),
            int(ledger.dims[1]),
            ledger.n_bits,
            ledger.E_i,
            ledger.I_A,
            ledger.I_B,
            ledger.I_total,
            ledger.E_f,
            ledger.E_distilled,
            ledger.gap,
            abs(ledger.gap) <= SATURATION_TOL,
            seed,
            runtime,
            transcripts,
        )


def aggregate_row(rows: list[ReportRow], runtime: float | None = None) -> ReportRow:
    first = rows[0]

    def mean(attr):
        return sum(getattr(r, attr) for r in rows) / len(rows)

    gap = mean("gap")
    return ReportRow(
        first.scenario,
        "aggregate",
        first.backend,
        first.d1,
        first.d2,
        mean("n_bits"),
        mean("E_i"),
        mean("I_A"),
        mean("I_B"),
        mean("I_total"),
        mean("E_f"),
        mean("E_distilled"),
        gap,
        all(r.saturated for r in rows),
        first.seed,
        runtime,
    )


@dataclass(frozen=True)
class Scenario:
    name: str
    protocol: str
    params: dict = field(default_factory=dict)
    backend: str = "index"
    seed: int = 0
    trials: int = 1
    ensemble: dict | None = None

    def __post_init__(self):
        if not self.name:
            raise ConfigError("scenario needs a name")
        if self.backend not in BACKENDS:
            raise ConfigError(f"scenario {self.name}: backend must be one of {BACKENDS}")
        if self.trials < 0 or self.seed < 0:
            raise ConfigError(f"scenario {self.name}: trials and seed must be non-negative")
        if self.protocol not in RUNNERS:
            raise ConfigError(f"scenario {self.name}: unknown protocol {self.protocol!r}")
        if self.ensemble is not None and self.protocol not in ENSEMBLE_PROTOCOLS:
            raise ConfigError(f"scenario {self.name}: an ensemble spec needs one of {ENSEMBLE_PROTOCOLS}")
        if self.ensemble is not None and self.backend != "matrix":
            raise ConfigError(f"scenario {self.name}: explicit ensembles run on the matrix backend")

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        if not isinstance(d, dict):
            raise ConfigError(f"scenario entry must be an object, got {d!r}")
        if set(d) == {"name"}:
            return builtin(d["name"])
        unknown = set(d) - {"name", "protocol", "params", "backend", "seed", "trials", "ensemble"}
        if unknown:
            raise ConfigError(f"unknown scenario keys {sorted(unknown)}")
        try:
            return cls(
                name=str(d["name"]),
                protocol=str(d.get("protocol", "random_protocol" if "ensemble" in d else "")),
                params=dict(d.get("params", {})),
                backend=str(d.get("backend", "matrix" if "ensemble" in d else "index")),
                seed=int(d.get("seed", 0)),
                trials=int(d.get("trials", 1)),
                ensemble=d.get("ensemble"),
            )
        except KeyError as exc:
            raise ConfigError(f"scenario missing key {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad scenario field: {exc}") from None

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "protocol": self.protocol,
            "params": self.params,
            "backend": self.backend,
            "seed": self.seed,
            "trials": self.trials,
        }
        if self.ensemble is not None:
            d["ensemble"] = self.ensemble
        return d


# ----------------------------------------------------------------------
# protocol runners: (scenario, trial) -> ProtocolOutcome
# ----------------------------------------------------------------------


def _call(fn: Callable, params: dict, **extra) -> Any:
    try:
        return fn(**params, **extra)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {getattr(fn, '__name__', fn)}: {exc}") from None


def _code(params: dict) -> StabilizerCode:
    params = dict(params)
    if "code_file" in params:
        path = Path(params["code_file"])
        try:
            return StabilizerCode.from_text(path.read_text(), name=path.stem)
        except OSError as exc:
            raise ConfigError(f"cannot read code file: {exc}") from None
    return StabilizerCode.builtin(params.get("code", "bitflip3"))


def _scenario_ensemble(s: Scenario, trial: int):
    spec = s.ensemble or {"constructor": "uniform_bell_ensemble", "params": {"d": 2, "copies": 1}}
    if spec.get("constructor") == "random_pure_ensemble":
        prm = dict(spec.get("params", {}))
        try:
            dims = BipartiteDims(int(prm.get("dA", 2)), int(prm.get("dB", 2)))
            size = int(prm.get("size", 2))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad random_pure_ensemble parameters: {exc}") from None
        return random_pure_ensemble(dims, size, make_rng(s.seed, trial, 0))
    return ensemble_from_config(spec)


def _basis_protocol(dims: BipartiteDims, basis: str) -> OneWayProtocol:
    """Alice then Bob measure their whole side in the computational or Fourier basis."""

    def inst(d, side):
        u = fourier(d) if basis == "fourier" else np.eye(d)
        return Instrument(tuple(np.outer(u[:, k], u[:, k].conj()) for k in range(d)), side)

    bob = inst(dims.dB, "B")
    return OneWayProtocol((AliceMeasure(inst(dims.dA, "A")), BobMeasure(bob)))


def _ensemble_runner(kind: str):
    def run(s: Scenario, trial: int) -> ProtocolOutcome:
        e = _scenario_ensemble(s, trial)
        if kind == "random_protocol":
            proto = random_protocol(e.dims, make_rng(s.seed, trial, 1), **s.params)
        else:
            proto = _basis_protocol(e.dims, kind)
        ledger = run_protocol(e, proto)
        return ProtocolOutcome(kind, "matrix", ledger, {}, ledger.registers, {})

    return run


def _batched(s: Scenario, trial: int) -> ProtocolOutcome:  # pragma: no cover
    raise AssertionError("parity protocols run as a batch")


RUNNERS: dict[str, Callable[[Scenario, int], ProtocolOutcome]] = {
    "two_copy_discrimination": lambda s, t: _call(P.two_copy_discrimination, s.params, backend=s.backend),
    "full_info_then_keep": lambda s, t: _call(P.full_info_then_keep, s.params, backend=s.backend),
    "bxor_chain": lambda s, t: _call(P.bxor_chain, s.params, backend=s.backend),
    "qutrit_two_copy_partial": lambda s, t: _call(P.qutrit_two_copy_partial, s.params, backend=s.backend),
    "ebit_assisted_discrimination": lambda s, t: _call(P.ebit_assisted_discrimination, s.params, backend=s.backend),
    "error_correct_distill": lambda s, t: P.error_correct_distill(_code(s.params), backend=s.backend),
    "recurrence": lambda s, t: _call(P.recurrence_ledger, s.params, backend=s.backend),
    "random_protocol": _ensemble_runner("random_protocol"),
    "computational": _ensemble_runner("computational"),
    "fourier": _ensemble_runner("fourier"),
    "hashing": _batched,
    "breeding": _batched,
}

_SKEWED_P = [0.9, 0.1 / 3, 0.1 / 3, 0.1 / 3]

BUILTIN: dict[str, dict] = {
    "ex1-full-info": {"protocol": "full_info_then_keep", "params": {"n_copies": 3}, "backend": "matrix"},
    "ex1-bxor-chain": {"protocol": "bxor_chain", "params": {"n_copies": 3}, "backend": "matrix"},
    "ex1-two-copy": {"protocol": "two_copy_discrimination", "params": {"d": 2}, "backend": "matrix"},
    "ex2-bxor-chain": {"protocol": "bxor_chain", "params": {"n_copies": 4}, "backend": "matrix"},
    "ex2-full-info": {"protocol": "full_info_then_keep", "params": {"n_copies": 4}, "backend": "matrix"},
    "odd5-bxor-chain": {"protocol": "bxor_chain", "params": {"n_copies": 5}, "backend": "index"},
    "ex3-qutrit-partial": {"protocol": "qutrit_two_copy_partial", "backend": "matrix"},
    "ex3-two-copy": {"protocol": "two_copy_discrimination", "params": {"d": 3}, "backend": "matrix"},
    "ebit-assisted-d2": {"protocol": "ebit_assisted_discrimination", "params": {"d": 2}, "backend": "matrix"},
    "ebit-assisted-d3": {"protocol": "ebit_assisted_discrimination", "params": {"d": 3}, "backend": "matrix"},
    "ec-bitflip3": {"protocol": "error_correct_distill", "params": {"code": "bitflip3"}, "backend": "matrix"},
    "ec-five-qubit": {"protocol": "error_correct_distill", "params": {"code": "five_qubit"}, "backend": "index"},
    "recurrence-0.7": {"protocol": "recurrence", "params": {"p": [0.7, 0.1, 0.1, 0.1]}, "backend": "index"},
    "hashing-48": {
        "protocol": "hashing",
        "params": {"n": 48, "p": _SKEWED_P, "margin": 10},
        "seed": 2024,
        "trials": 20,
    },
    "breeding-48": {
        "protocol": "breeding",
        "params": {"n": 48, "p": _SKEWED_P, "margin": 10},
        "seed": 2024,
        "trials": 20,
    },
}


def builtin(name: str) -> Scenario:
    try:
        spec = BUILTIN[name]
    except KeyError:
        raise ConfigError(f"unknown built-in scenario {name!r}") from None
    return Scenario.from_dict({"name": name, **spec})


def builtin_scenarios() -> list[Scenario]:
    return [builtin(n) for n in BUILTIN]


def load_scenarios(path) -> list[Scenario]:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file is not valid JSON: {exc}") from None
    if not isinstance(raw, dict) or not isinstance(raw.get("scenarios"), list):
        raise ConfigError("scenario file must be an object with a 'scenarios' list")
    scenarios = [Scenario.from_dict(d) for d in raw["scenarios"]]
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ConfigError("scenario names must be unique")
    return scenarios


def transcript_table(ledger: Ledger) -> list | None:
    if ledger.distribution is None:
        return None
    return [
        {"x": x, "alice": list(a), "bob": list(b), "p": p}
        for (x, a, b), p in sorted(ledger.distribution.table.items(), key=lambda kv: repr(kv[0]))
    ]


def run_scenario(s: Scenario, *, timing: bool = False, transcripts: bool = False) -> list[ReportRow]:
    """One row per trial plus an aggregate row; deterministic per seed."""
    if s.trials == 0:
        return []
    start = time.perf_counter()
    rows: list[ReportRow] = []
    if s.protocol in ("hashing", "breeding"):
        prm = dict(s.params)
        try:
            outcomes = run_trials(
                s.protocol, int(prm.pop("n")), prm.pop("p"), int(prm.pop("margin", 0)), s.trials, s.seed,
                workers=worker_count(), **prm,
            )
        except KeyError as exc:
            raise ConfigError(f"scenario {s.name}: missing parameter {exc}") from None
        for t, o in enumerate(outcomes):
            rows.append(ReportRow.from_ledger(s.name, t, "index", o.ledger, s.seed))
    else:
        runner = RUNNERS[s.protocol]
        for t in range(s.trials):
            t0 = time.perf_counter()
            o = runner(s, t)
            rt = time.perf_counter() - t0 if timing else None
            tt = transcript_table(o.ledger) if transcripts else None
            rows.append(ReportRow.from_ledger(s.name, t, o.backend, o.ledger, s.seed, rt, tt))
    for r in rows:
        if r.gap < -1e-7:
            raise LedgerViolation(f"scenario {s.name} trial {r.trial}: gap {r.gap:.3e}")
    agg = aggregate_row(rows, time.perf_counter() - start if timing else None)
    return rows + [agg]


def verify_bound_rows(trials: int, dims, seed: int, *, timing: bool = False) -> tuple[list[ReportRow], int]:
    start = time.perf_counter()
    checks = verify_bound(trials, dims, seed, workers=worker_count())
    rows = [
        ReportRow.from_ledger(f"verify-bound-{c.dims[0]}x{c.dims[1]}", c.trial, "matrix", c.ledger, seed)
        for c in checks
    ]
    bad = sum(1 for c in checks if not c.ok)
    if rows:
        agg = aggregate_row(rows, time.perf_counter() - start if timing else None)
        rows.append(ReportRow(**{**agg.__dict__, "scenario": "verify-bound"}))
    return rows, bad
