"""One-way LOCC execution on pure-component ensembles.

A protocol is a list of steps.  Alice's measurements all come before Bob's, so
classical messages only flow Alice -> Bob; Bob may condition each of his
instruments on everything announced so far.

Execution keeps, for every transcript ``t = (alice_outcomes, bob_outcomes)``
and every ensemble item ``x``, the joint weight ``p(x, t)`` and the normalized
post-measurement state.  Components stay pure throughout, so the entanglement
of each one is its entropy of entanglement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    ConfigError,
    ContractError,
    LedgerViolation,
    MessageOrderError,
    ShapeError,
    UnsupportedMeasureError,
)
from .info import (
    JointDistribution,
    conditional_mutual_info,
    entropy_of_amplitudes,
    holevo_of,
    mutual_info,
    spectrum_entropy,
)
from .linalg import Side, as_matrix, eigvalsh, is_unitary
from .states import BipartiteDims, Ensemble, PureState

COMPLETENESS_TOL = 1e-8
UNITARY_TOL = 1e-8
BRANCH_CUTOFF = 1e-12
LEDGER_TOL = 1e-7
CHAIN_TOL = 1e-9
CERT_TOL = 1e-7  # fidelity slack for calling a register known & maximally entangled
PRODUCT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Instrument:
    """Measurement (Kraus) operators acting on one party's whole space."""

    operators: tuple[np.ndarray, ...]
    side: Side
    labels: tuple = ()

    def __post_init__(self):
        ops = tuple(as_matrix(m, name="instrument operator") for m in self.operators)
        if not ops:
            raise ConfigError("instrument needs at least one operator")
        d = ops[0].shape[1]
        if any(m.shape != (d, d) for m in ops):
            raise ShapeError("instrument operators must all be square of equal size")
        if self.side not in ("A", "B"):
            raise ConfigError(f"side must be 'A' or 'B', got {self.side!r}")
        defect = np.max(np.abs(sum(m.conj().T @ m for m in ops) - np.eye(d)))
        if defect > COMPLETENESS_TOL:
            raise ContractError(f"instrument violates completeness (defect {defect:.2e})")
        labels = tuple(self.labels) if self.labels else tuple(range(len(ops)))
        if len(labels) != len(ops) or len(set(labels)) != len(labels):
            raise ConfigError("instrument labels must be distinct, one per operator")
        for m in ops:
            m.setflags(write=False)
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @classmethod
    def projective(cls, projectors: Mapping, side: Side) -> "Instrument":
        return cls(tuple(projectors.values()), side, tuple(projectors.keys()))

    @classmethod
    def identity(cls, dim: int, side: Side) -> "Instrument":
        return cls((np.eye(dim, dtype=complex),), side)

    def completeness_defect(self) -> float:
        return float(np.max(np.abs(sum(m.conj().T @ m for m in self.operators) - np.eye(self.dim))))


# ----------------------------------------------------------------------
# protocol steps
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    alice: np.ndarray | None = None
    bob: np.ndarray | None = None

    def __post_init__(self):
        for name in ("alice", "bob"):
            u = getattr(self, name)
            if u is not None and not is_unitary(u, UNITARY_TOL):
                raise ContractError(f"{name} operator is not unitary within {UNITARY_TOL}")


@dataclass(frozen=True, eq=False)
class AliceMeasure:
    instrument: Instrument

    def __post_init__(self):
        if self.instrument.side != "A":
            raise ConfigError("AliceMeasure needs an instrument on side A")


@dataclass(frozen=True, eq=False)
class BobMeasure:
    """Bob's instrument, possibly chosen from the transcript so far.

    ``choose`` is either an :class:`Instrument` or a callable receiving
    ``(alice_outcomes, bob_outcomes)`` and returning one.
    """

    choose: Union[Instrument, Callable[[tuple], Instrument]]

    def instrument_for(self, transcript: tuple) -> Instrument:
        inst = self.choose if isinstance(self.choose, Instrument) else self.choose(transcript)
        if not isinstance(inst, Instrument) or inst.side != "B":
            raise ConfigError(f"no side-B instrument for transcript {transcript}")
        return inst


@dataclass(frozen=True)
class Discard:
    """Drop tensor factors (indices into the current factor lists) shown to be in a product state."""

    alice: tuple[int, ...] = ()
    bob: tuple[int, ...] = ()


ProtocolStep = Union[LocalUnitary, AliceMeasure, BobMeasure, Discard]


@dataclass(frozen=True)
class OneWayProtocol:
    steps: tuple[ProtocolStep, ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        seen_bob = False
        for s in steps:
            if not isinstance(s, (LocalUnitary, AliceMeasure, BobMeasure, Discard)):
                raise ConfigError(f"unknown protocol step {s!r}")
            if isinstance(s, BobMeasure):
                seen_bob = True
            elif isinstance(s, AliceMeasure) and seen_bob:
                raise MessageOrderError("Alice cannot measure after Bob: messages flow A -> B only")
        object.__setattr__(self, "steps", steps)


# ----------------------------------------------------------------------
# branch ensembles
# ----------------------------------------------------------------------

Transcript = tuple  # (alice_outcomes: tuple, bob_outcomes: tuple)
Component = tuple  # (joint weight p(x, t), amplitude matrix dA x dB)


@dataclass(frozen=True, eq=False)
class BranchEnsemble:
    """For each transcript: joint weights p(x, t) and post-measurement states."""

    dims: BipartiteDims
    branches: Mapping[Transcript, Mapping[int, Component]]

    @classmethod
    def from_ensemble(cls, e: Ensemble) -> "BranchEnsemble":
        if not e.is_pure:
            raise UnsupportedMeasureError("LOCC engine needs pure-component ensembles")
        comps = {x: (p, s.matrix) for x, (p, s) in enumerate(e.items) if p > 0}
        return cls(e.dims, {((), ()): comps})

    def transcript_probabilities(self) -> dict[Transcript, float]:
        return {t: sum(w for w, _ in comp.values()) for t, comp in self.branches.items()}

    def conditional(self, t: Transcript) -> Ensemble:
        comp = self.branches[t]
        total = sum(w for w, _ in comp.values())
        return Ensemble(
            tuple((w / total, PureState(psi.ravel(), self.dims)) for w, psi in comp.values()),
            tuple(comp.keys()),
        )

    def avg_entanglement(self) -> float:
        return float(
            sum(w * entropy_of_amplitudes(psi) for comp in self.branches.values() for w, psi in comp.values())
        )

    def apply_unitary(self, u: LocalUnitary) -> "BranchEnsemble":
        ua = None if u.alice is None else as_matrix(u.alice)
        ub = None if u.bob is None else as_matrix(u.bob)
        if ua is not None and ua.shape[0] != self.dims.dA:
            raise ShapeError(f"Alice unitary is {ua.shape}, side dimension {self.dims.dA}")
        if ub is not None and ub.shape[0] != self.dims.dB:
            raise ShapeError(f"Bob unitary is {ub.shape}, side dimension {self.dims.dB}")
        out = {}
        for t, comp in self.branches.items():
            new = {}
            for x, (w, psi) in comp.items():
                if ua is not None:
                    psi = ua @ psi
                if ub is not None:
                    psi = psi @ ub.T
                new[x] = (w, psi)
            out[t] = new
        return BranchEnsemble(self.dims, out)

    def apply_instrument(self, inst: Instrument) -> "BranchEnsemble":
        return self._measure(lambda t: inst)

    def _measure(self, chooser: Callable[[Transcript], Instrument]) -> "BranchEnsemble":
        out: dict[Transcript, dict[int, Component]] = {}
        for t, comp in self.branches.items():
            inst = chooser(t)
            side_dim = self.dims.dA if inst.side == "A" else self.dims.dB
            if inst.dim != side_dim:
                raise ShapeError(f"instrument dimension {inst.dim} != side dimension {side_dim}")
            ops = np.stack(inst.operators)
            for x, (w, psi) in comp.items():
                if inst.side == "A":
                    post = ops @ psi
                else:
                    post = psi @ np.transpose(ops, (0, 2, 1))
                norms = np.einsum("kij,kij->k", post.conj(), post).real
                for label, q, phi in zip(inst.labels, norms, post):
                    pw = w * q
                    if pw <= BRANCH_CUTOFF:
                        continue
                    key = (t[0] + (label,), t[1]) if inst.side == "A" else (t[0], t[1] + (label,))
                    out.setdefault(key, {})[x] = (pw, phi / np.sqrt(q))
        return BranchEnsemble(self.dims, _renormalize(out))

    def discard(self, d: Discard) -> "BranchEnsemble":
        fa, fb = list(self.dims.a_factors), list(self.dims.b_factors)
        drop_a, drop_b = sorted(set(d.alice)), sorted(set(d.bob))
        if any(not 0 <= i < len(fa) for i in drop_a) or any(not 0 <= i < len(fb) for i in drop_b):
            raise ShapeError("discard indices out of range")
        keep_a = [i for i in range(len(fa)) if i not in drop_a]
        keep_b = [i for i in range(len(fb)) if i not in drop_b]
        ka, kb = prod(fa[i] for i in keep_a), prod(fb[i] for i in keep_b)
        da, db = prod(fa[i] for i in drop_a), prod(fb[i] for i in drop_b)
        perm = drop_a + [len(fa) + i for i in drop_b] + keep_a + [len(fa) + i for i in keep_b]
        new_dims = BipartiteDims(
            ka, kb, tuple(fa[i] for i in keep_a) or (1,), tuple(fb[i] for i in keep_b) or (1,)
        )
        out = {}
        for t, comp in self.branches.items():
            new = {}
            for x, (w, psi) in comp.items():
                m = psi.reshape(fa + fb).transpose(perm).reshape(da * db, ka * kb)
                u, s, vh = np.linalg.svd(m, full_matrices=False)
                if s.size > 1 and s[1] ** 2 > PRODUCT_TOL:
                    raise ContractError("discarded factors are entangled with the rest")
                new[x] = (w, (vh[0] * s[0]).reshape(ka, kb))
            out[t] = new
        return BranchEnsemble(new_dims, out)


def _renormalize(branches: dict) -> dict:
    """Absorb the O(cutoff) mass lost to pruning so weights sum to 1 exactly."""
    total = sum(w for comp in branches.values() for w, _ in comp.values())
    if total <= 0:
        raise ConfigError("all branches pruned")
    return {t: {x: (w / total, psi) for x, (w, psi) in comp.items()} for t, comp in branches.items()}


def apply_instrument(b: BranchEnsemble, inst: Instrument) -> BranchEnsemble:
    return b.apply_instrument(inst)


# ----------------------------------------------------------------------
# execution and ledger
# ----------------------------------------------------------------------


@dataclass
class _Trace:
    snapshots: list[BranchEnsemble]
    before_alice: BranchEnsemble
    before_bob: BranchEnsemble


def _execute(e: Ensemble, p: OneWayProtocol) -> _Trace:
    b = BranchEnsemble.from_ensemble(e)
    snapshots = [b]
    before_alice = before_bob = None
    for step in p.steps:
        if isinstance(step, LocalUnitary):
            b = b.apply_unitary(step)
        elif isinstance(step, AliceMeasure):
            if before_alice is None:
                before_alice = b
            b = b.apply_instrument(step.instrument)
        elif isinstance(step, BobMeasure):
            if before_bob is None:
                before_bob = b
            b = b._measure(step.instrument_for)
        else:
            b = b.discard(step)
        snapshots.append(b)
    return _Trace(snapshots, before_alice or snapshots[0], before_bob or b)


@dataclass(frozen=True)
class Register:
    """A component of a final branch certified as a known maximally entangled state."""

    transcript: Transcript
    kind: str  # "pair" (single factor pair) or "whole" (LU-equivalent to Φ_r ⊗ product)
    dim: int
    factor: int | None = None
    fidelity: float = 1.0

    @property
    def ebits(self) -> float:
        return float(np.log2(self.dim))


@dataclass(frozen=True)
class Ledger:
    n_bits: float
    E_i: float
    E_f: float
    I_A: float
    I_B: float
    I_total: float
    E_distilled: float
    distribution: JointDistribution | None
    dims: tuple[int, int]
    step_entanglement: tuple[float, ...] = ()
    registers: tuple[Register, ...] = ()
    final: BranchEnsemble | None = field(default=None, compare=False, repr=False)

    @property
    def gap(self) -> float:
        return self.n_bits - self.E_i - self.E_f - self.I_total

    @property
    def saturated(self) -> bool:
        return abs(self.gap) <= 1e-6

    def violations(self, tol: float = LEDGER_TOL) -> list[str]:
        out = []
        if self.gap < -tol:
            out.append(f"complementarity bound violated: gap {self.gap:.3e}")
        if self.I_total > self.I_A + self.I_B + CHAIN_TOL:
            out.append("I_total exceeds I_A + I_B")
        if self.E_distilled > self.E_f + CHAIN_TOL:
            out.append("distilled entanglement exceeds final average entanglement")
        se = self.step_entanglement
        for k in range(1, len(se)):
            if se[k] > se[k - 1] + tol:
                out.append(f"average entanglement increased at step {k}: {se[k - 1]:.9f} -> {se[k]:.9f}")
        return out

    def check(self, tol: float = LEDGER_TOL) -> "Ledger":
        bad = self.violations(tol)
        if bad:
            raise LedgerViolation("; ".join(bad))
        return self


def transcript_distribution(b: BranchEnsemble, labels: Sequence) -> JointDistribution:
    table = {}
    for (ta, tb), comp in b.branches.items():
        for x, (w, _) in comp.items():
            table[(labels[x], ta, tb)] = w
    return JointDistribution(("X", "A", "B"), table)


def _flat_rank(psi: np.ndarray) -> tuple[int, float]:
    """Largest r with fidelity to some rank-r maximally entangled state >= 1 - CERT_TOL."""
    lam = np.clip(np.linalg.svd(psi, compute_uv=False), 0, None)
    best = (1, float(lam[0] ** 2))
    for r in range(2, lam.size + 1):
        f = float(lam[:r].sum() ** 2 / r)
        if f >= 1 - CERT_TOL:
            best = (r, f)
    return best


def pair_reduced(psi: np.ndarray, dims: BipartiteDims, i: int) -> np.ndarray:
    fa, fb = list(dims.a_factors), list(dims.b_factors)
    t = psi.reshape(fa + fb)
    k = len(fa)
    axes_keep = [i, k + i]
    rest = [j for j in range(len(fa) + len(fb)) if j not in axes_keep]
    m = t.transpose(axes_keep + rest).reshape(fa[i] * fb[i], -1)
    return m @ m.conj().T


def _pair_registers(t: Transcript, states: list[np.ndarray], dims: BipartiteDims) -> list[Register]:
    if len(dims.a_factors) != len(dims.b_factors) or len(dims.a_factors) < 2:
        return []
    regs = []
    for i, (da, db) in enumerate(zip(dims.a_factors, dims.b_factors)):
        if da != db or da < 2:
            continue
        ref = None
        ok = True
        worst = 1.0
        for psi in states:
            rho = pair_reduced(psi, dims, i)
            w, v = np.linalg.eigh(rho)
            top = v[:, -1]
            pure = float(w[-1])
            r, f = _flat_rank(top.reshape(da, db))
            fid = pure * f
            if r != da or fid < 1 - CERT_TOL:
                ok = False
                break
            if ref is None:
                ref = top
            elif abs(np.vdot(ref, top)) ** 2 < 1 - CERT_TOL:
                ok = False
                break
            worst = min(worst, fid)
        if ok:
            regs.append(Register(t, "pair", da, i, worst))
    return regs


def certify_registers(b: BranchEnsemble) -> tuple[float, tuple[Register, ...]]:
    """Distilled ebits: known (transcript-determined) maximally entangled content.

    Per transcript we credit the larger of (a) the sum over single factor pairs
    that are pure, maximally entangled and identical across all consistent x,
    and (b) log2 r when the whole state is identical across x and has a flat
    Schmidt spectrum of rank r.
    """
    total = 0.0
    registers: list[Register] = []
    for t, comp in b.branches.items():
        pt = sum(w for w, _ in comp.values())
        states = [psi for _, psi in comp.values()]
        ref = states[0].ravel()
        same = all(abs(np.vdot(ref, s.ravel())) ** 2 >= 1 - CERT_TOL for s in states[1:])
        pair_regs = _pair_registers(t, states, b.dims) if same else []
        whole: list[Register] = []
        if same:
            r, f = _flat_rank(states[0])
            if r > 1:
                whole = [Register(t, "whole", r, None, f)]
        pair_bits = sum(reg.ebits for reg in pair_regs)
        whole_bits = sum(reg.ebits for reg in whole)
        chosen = pair_regs if pair_bits >= whole_bits else whole
        registers.extend(chosen)
        total += pt * max(pair_bits, whole_bits)
    return total, tuple(registers)


def ledger_from_branches(
    e: Ensemble, final: BranchEnsemble, step_entanglement: Sequence[float] = ()
) -> Ledger:
    dist = transcript_distribution(final, e.labels)
    I_A = mutual_info(dist, "X", "A")
    I_B = conditional_mutual_info(dist, "X", "B", "A")
    I_total = mutual_info(dist, "X", ["A", "B"])
    e_i = float(sum(p * entropy_of_amplitudes(s.matrix) for p, s in e.items))
    e_f = final.avg_entanglement()
    e_dist, regs = certify_registers(final)
    return Ledger(
        n_bits=e.dims.n_bits,
        E_i=e_i,
        E_f=e_f,
        I_A=I_A,
        I_B=I_B,
        I_total=I_total,
        E_distilled=e_dist,
        distribution=dist,
        dims=(e.dims.dA, e.dims.dB),
        step_entanglement=tuple(step_entanglement),
        registers=regs,
        final=final,
    )


def run_protocol(e: Ensemble, p: OneWayProtocol, *, check: bool = True) -> Ledger:
    trace = _execute(e, p)
    ledger = ledger_from_branches(e, trace.snapshots[-1], [s.avg_entanglement() for s in trace.snapshots])
    return ledger.check() if check else ledger


# ----------------------------------------------------------------------
# Holevo chain audit
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class BobRoundAudit:
    alice_transcript: tuple
    p_K: float
    I_B: float
    chi_B: float
    avg_entanglement: float
    bound: float  # log2 dB - avg_entanglement


@dataclass(frozen=True)
class HolevoAudit:
    I_A: float
    chi_A: float
    bound_A: float  # log2 dA - E_i
    rounds: tuple[BobRoundAudit, ...]
    I_B: float
    E_i: float
    E_f: float
    total_bound: float  # log2 dA + log2 dB - E_i - E_f
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _side_chi(comp: Mapping[int, Component], side: str) -> float:
    total = sum(w for w, _ in comp.values())
    probs, rhos = [], []
    for w, psi in comp.values():
        probs.append(w / total)
        rhos.append(psi @ psi.conj().T if side == "A" else (psi.T @ psi.conj()))
    return holevo_of(probs, rhos)


def holevo_chain_audit(e: Ensemble, p: OneWayProtocol, tol: float = LEDGER_TOL) -> HolevoAudit:
    trace = _execute(e, p)
    ledger = ledger_from_branches(e, trace.snapshots[-1])
    dist = ledger.distribution
    dA0, dB0 = e.dims.dA, e.dims.dB

    pre_a = trace.before_alice
    (comp0,) = pre_a.branches.values()
    chi_A = _side_chi(comp0, "A")
    bound_A = float(np.log2(dA0)) - ledger.E_i

    rounds = []
    pre_b = trace.before_bob
    bob_dim = pre_b.dims.dB
    for t, comp in pre_b.branches.items():
        pk = sum(w for w, _ in comp.values())
        cond = {key: v for key, v in dist.table.items() if key[1] == t[0]}
        I_B_k = 0.0
        if cond:
            tot = sum(cond.values())
            sub = JointDistribution(("X", "A", "B"), {k: v / tot for k, v in cond.items()})
            I_B_k = mutual_info(sub, "X", "B")
        chi_B = _side_chi(comp, "B")
        avg_e = sum(w * entropy_of_amplitudes(psi) for w, psi in comp.values()) / pk
        rounds.append(BobRoundAudit(t[0], pk, I_B_k, chi_B, avg_e, float(np.log2(bob_dim)) - avg_e))

    viol = []
    if ledger.I_A > chi_A + tol:
        viol.append(f"I_A {ledger.I_A:.9f} exceeds Alice Holevo bound {chi_A:.9f}")
    if chi_A > bound_A + tol:
        viol.append(f"Alice Holevo {chi_A:.9f} exceeds log dA - E_i = {bound_A:.9f}")
    for r in rounds:
        if r.I_B > r.chi_B + tol:
            viol.append(f"I_B(K={r.alice_transcript}) exceeds Bob Holevo bound")
        if r.chi_B > r.bound + tol:
            viol.append(f"Bob Holevo (K={r.alice_transcript}) exceeds log dB - avg E")
    total_bound = float(np.log2(dA0) + np.log2(dB0)) - ledger.E_i - ledger.E_f
    if ledger.I_A + ledger.I_B > total_bound + tol:
        viol.append("I_A + I_B exceeds log dA + log dB - E_i - E_f")
    return HolevoAudit(
        ledger.I_A, chi_A, bound_A, tuple(rounds), ledger.I_B, ledger.E_i, ledger.E_f, total_bound, tuple(viol)
    )


def reduced_spectrum_entropy(rho: np.ndarray) -> float:
    return spectrum_entropy(eigvalsh(rho))
