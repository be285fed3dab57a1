"""Named protocols, each returning a :class:`ProtocolOutcome`.

Bell-pair protocols are written once as a list of index-level :class:`Op`
and run either on the exact index backend or, translated into local gates and
basis measurements, on the matrix engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from math import log2
from typing import Sequence

import numpy as np

from .bell import (
    CSUM_POWER,
    BellIndex,
    BellString,
    Op,
    StabilizerCode,
    bilateral_syndrome,
    block_pairing,
    csum,
    csum_d,
    displayed_qutrit_pairing,
    pauli_shift,
    recurrence_map,
    run_ops,
    x_compare_rule,
    xc,
    z_compare_rule,
    zc,
)
from .errors import ConfigError, DegenerateInputError
from .gates import basis_projectors, fourier, hadamard, on_factors, phase_s, sum_gate
from .info import JointDistribution, binary_entropy, conditional_mutual_info, mutual_info
from .locc import (
    AliceMeasure,
    BobMeasure,
    Instrument,
    Ledger,
    LocalUnitary,
    OneWayProtocol,
    Register,
    pair_reduced,
    run_protocol,
)
from .states import BipartiteDims, Ensemble, PureState, canonical_product, gen_bell

SATURATION_TOL = 1e-7


@dataclass(frozen=True)
class ProtocolOutcome:
    name: str
    backend: str
    ledger: Ledger
    identified: dict = field(default_factory=dict)  # transcript -> decoded label (or None)
    registers: tuple[Register, ...] = ()
    extras: dict = field(default_factory=dict)

    @property
    def distilled_ebits(self) -> float:
        """Transcript-weighted sum of log2(dim) over distilled registers."""
        if self.ledger.distribution is None:
            # single realized transcript (Monte Carlo protocols)
            return float(sum(r.ebits for r in self.registers))
        probs = _transcript_probs(self.ledger)
        return float(sum(probs.get(r.transcript, 0.0) * r.ebits for r in self.registers))


def _transcript_probs(ledger: Ledger) -> dict:
    if ledger.distribution is None:
        return {}
    return {(a, b): p for (a, b), p in ledger.distribution.marginal(["A", "B"]).items()}


# ----------------------------------------------------------------------
# shared machinery for Bell-pair circuits
# ----------------------------------------------------------------------


def pair_fidelity(ledger: Ledger, factor: int, label: tuple[int, int] = (0, 0), labels=None) -> dict:
    """Worst fidelity of factor pair ``factor`` to Φ_label over transcripts, per hidden x.

    Keys are ensemble positions, or ``labels[x]`` when labels are given.
    """
    final = ledger.final
    if final is None:
        raise ConfigError("pair fidelity needs a matrix-backend ledger")
    ref = gen_bell(final.dims.a_factors[factor], *label).amplitudes
    out: dict = {}
    for comp in final.branches.values():
        for x, (_, psi) in comp.items():
            rho = pair_reduced(psi, final.dims, factor)
            key = labels[x] if labels is not None else x
            out[key] = min(out.get(key, 1.0), float(np.real(ref.conj() @ rho @ ref)))
    return out


def _bell_inputs(d: int, strings: Sequence[Sequence[tuple[int, int]]], probs=None):
    probs = probs if probs is not None else [1.0 / len(strings)] * len(strings)
    return [(p, BellString.from_labels(d, s)) for p, s in zip(probs, strings)]


def index_ledger(inputs, labels, ops: Sequence[Op]) -> tuple[Ledger, dict]:
    """Run ``ops`` on every input string and account with pair counting.

    Every unconsumed pair is a Bell state, so entanglement is log2 d per pair;
    a pair is distilled when its final label is the same for every input
    consistent with the transcript.
    """
    d, k = inputs[0][1].d, len(inputs[0][1])
    ld = log2(d)
    runs = [run_ops(s, ops) for _, s in inputs]
    table = {}
    for (p, _), x, run in zip(inputs, labels, runs):
        values = tuple(v for _, _, v in run.transcript)
        table[(x, (), values)] = table.get((x, (), values), 0.0) + p
    dist = JointDistribution(("X", "A", "B"), table)

    by_t: dict = {}
    for (p, _), x, run in zip(inputs, labels, runs):
        t = ((), tuple(v for _, _, v in run.transcript))
        by_t.setdefault(t, []).append((p, x, run))
    e_f = 0.0
    e_dist = 0.0
    registers = []
    identified = {}
    for t, group in by_t.items():
        pt = sum(p for p, _, _ in group)
        finals = [run.final for _, _, run in group]
        live = [j for j in range(k) if finals[0][j] is not None]
        e_f += pt * len(live) * ld
        for j in live:
            if all(f[j] == finals[0][j] for f in finals):
                registers.append(Register(t, "pair", d, j, 1.0))
                e_dist += pt * ld
        xs = {x for _, x, _ in group}
        identified[t] = next(iter(xs)) if len(xs) == 1 else None

    # per-step entanglement: live pair count after each op (identical for all inputs)
    live = k
    trace = [live * ld]
    for op in ops:
        if op.kind in ("z", "x"):
            live -= 1
        trace.append(live * ld)
    I_total = mutual_info(dist, "X", ["A", "B"])
    ledger = Ledger(
        n_bits=2 * k * ld,
        E_i=k * ld,
        E_f=e_f,
        I_A=mutual_info(dist, "X", "A"),
        I_B=conditional_mutual_info(dist, "X", "B", "A"),
        I_total=I_total,
        E_distilled=e_dist,
        distribution=dist,
        dims=(d**k, d**k),
        step_entanglement=tuple(trace),
        registers=tuple(registers),
    )
    return ledger.check(), identified


def _split_ops(ops: Sequence[Op]):
    gates, meas = [], []
    for op in ops:
        if op.kind in ("z", "x"):
            meas.append(op)
        elif meas:
            raise ConfigError("matrix translation needs all comparisons after all gates")
        else:
            gates.append(op)
    return gates, meas


def ops_to_protocol(d: int, k: int, ops: Sequence[Op]) -> tuple[OneWayProtocol, list[Op]]:
    """Translate an index circuit into local gates and basis measurements."""
    gates, meas = _split_ops(ops)
    fd = (d,) * k
    steps = []
    for op in gates:
        if op.kind == "csum":
            u = on_factors(sum_gate(d, CSUM_POWER), list(op.pairs), fd)
            steps.append(LocalUnitary(u, u))
        elif op.kind == "h":
            if d != 2:
                raise ConfigError("bilateral rotations are qubit-only")
            u = on_factors(hadamard(), list(op.pairs), fd)
            steps.append(LocalUnitary(u, u))
        else:
            if d != 2:
                raise ConfigError("bilateral rotations are qubit-only")
            s = phase_s()
            steps.append(LocalUnitary(on_factors(s, list(op.pairs), fd), on_factors(s.conj(), list(op.pairs), fd)))
    if meas:
        bases = {op.pairs[0]: (np.eye(d) if op.kind == "z" else fourier(d)) for op in meas}
        projs = basis_projectors(bases, fd)
        steps.append(AliceMeasure(Instrument.projective(projs, "A")))
        steps.append(BobMeasure(Instrument.projective(projs, "B")))
    return OneWayProtocol(tuple(steps)), sorted(meas, key=lambda op: op.pairs[0])


def matrix_run(d: int, strings, labels, ops: Sequence[Op], probs=None) -> tuple[Ledger, dict, list[Op]]:
    k = len(strings[0])
    probs = probs if probs is not None else [1.0 / len(strings)] * len(strings)
    states = [canonical_product([gen_bell(d, n, m) for n, m in s]) for s in strings]
    e = Ensemble(tuple(zip(probs, states)), tuple(labels))
    protocol, meas_sorted = ops_to_protocol(d, k, ops)
    ledger = run_protocol(e, protocol)
    identified = {}
    by_t: dict = {}
    for (x, ta, tb), p in ledger.distribution.table.items():
        by_t.setdefault((ta, tb), set()).add(x)
    for t, xs in by_t.items():
        identified[t] = next(iter(xs)) if len(xs) == 1 else None
    return ledger, identified, meas_sorted


def decode_matrix_transcript(d: int, meas_sorted: Sequence[Op], ops: Sequence[Op], t) -> tuple[int, ...]:
    """Announced comparison values, ordered like the comparisons in ``ops``."""
    if not meas_sorted:
        return ()
    (a,), (b,) = t
    vals = {}
    for op, ai, bi in zip(meas_sorted, a, b):
        rule = z_compare_rule if op.kind == "z" else x_compare_rule
        vals[op.pairs[0]] = rule(d, ai, bi)
    return tuple(vals[op.pairs[0]] for op in ops if op.kind in ("z", "x"))


def _run_bell_protocol(name, d, strings, labels, ops, backend, probs=None, extras=None) -> ProtocolOutcome:
    if backend == "index":
        ledger, identified = index_ledger(_bell_inputs(d, strings, probs), labels, ops)
        return ProtocolOutcome(name, backend, ledger, identified, ledger.registers, dict(extras or {}))
    if backend == "matrix":
        ledger, identified, meas = matrix_run(d, strings, labels, ops, probs)
        ex = dict(extras or {})
        ex["announced"] = {t: decode_matrix_transcript(d, meas, ops, t) for t in identified}
        return ProtocolOutcome(name, backend, ledger, identified, ledger.registers, ex)
    raise ConfigError(f"unknown backend {backend!r}")


def _all_labels(d: int) -> list[tuple[int, int]]:
    return [(n, m) for n in range(d) for m in range(d)]


# ----------------------------------------------------------------------
# named protocols
# ----------------------------------------------------------------------


def two_copy_ops() -> list[Op]:
    return [csum(0, 1), zc(0), xc(1)]


def two_copy_discrimination(d: int = 2, backend: str = "index") -> ProtocolOutcome:
    if d < 2:
        raise ConfigError("d must be >= 2")
    labels = _all_labels(d)
    strings = [[lab, lab] for lab in labels]
    return _run_bell_protocol("two_copy_discrimination", d, strings, labels, two_copy_ops(), backend)


def full_info_then_keep(n_copies: int, backend: str = "index") -> ProtocolOutcome:
    if n_copies < 2:
        raise ConfigError("full_info_then_keep needs at least 2 copies")
    labels = _all_labels(2)
    strings = [[lab] * n_copies for lab in labels]
    return _run_bell_protocol("full_info_then_keep", 2, strings, labels, two_copy_ops(), backend)


def bxor_chain_ops(n_copies: int) -> list[Op]:
    if n_copies < 3:
        raise ConfigError("bxor_chain needs at least 3 copies")
    ops: list[Op] = []
    last_triple = n_copies - 3 if n_copies % 2 else n_copies - 4
    for i in range(0, last_triple + 1, 2):
        # zero copies i and i+1, leave the unknown label on copy i+2
        ops += [csum(i, i + 1), csum(i + 2, i), csum(i + 1, i + 2)]
    if n_copies % 2:
        ops.append(zc(n_copies - 1))
    else:
        ops += [csum(n_copies - 2, n_copies - 1), zc(n_copies - 2), xc(n_copies - 1)]
    return ops


def bxor_chain(n_copies: int, backend: str = "index") -> ProtocolOutcome:
    ops = bxor_chain_ops(n_copies)
    labels = _all_labels(2)
    strings = [[lab] * n_copies for lab in labels]
    return _run_bell_protocol("bxor_chain", 2, strings, labels, ops, backend)


def qutrit_two_copy_partial(backend: str = "matrix") -> ProtocolOutcome:
    labels = _all_labels(3)
    strings = [[lab, lab] for lab in labels]
    ops = [csum(0, 1), zc(1)]
    post = {lab: tuple(i.label for i in csum_d(BellIndex(3, *lab), BellIndex(3, *lab))) for lab in labels}
    extras = {
        "post_csum": post,
        "block_pairing": block_pairing(3),
        "block_pairing_matches_display": block_pairing(3) == displayed_qutrit_pairing(),
    }
    return _run_bell_protocol("qutrit_two_copy_partial", 3, strings, labels, ops, backend, extras=extras)


def ebit_assisted_discrimination(d: int = 2, backend: str = "index", singleton: bool = False) -> ProtocolOutcome:
    if d not in (2, 3):
        raise ConfigError(f"ebit-assisted discrimination supports d in (2, 3), got {d}")
    labels = [(0, 0)] if singleton else _all_labels(d)
    strings = [[lab, (0, 0)] for lab in labels]
    ops = [csum(0, 1), zc(1), xc(0)]
    ancilla = {lab: csum_d(BellIndex(d, *lab), BellIndex(d, 0, 0))[1].label for lab in labels}
    return _run_bell_protocol(
        "ebit_assisted_discrimination", d, strings, labels, ops, backend, extras={"ancilla_after_csum": ancilla}
    )


# ----------------------------------------------------------------------
# error-correction distillation
# ----------------------------------------------------------------------


def _projector(gen_mats: Sequence[np.ndarray], syndrome: Sequence[int], dim: int) -> np.ndarray:
    p = np.eye(dim, dtype=complex)
    for g, s in zip(gen_mats, syndrome):
        p = p @ (np.eye(dim) + (-1) ** s * g) / 2
    return p


def error_correct_distill(code: StabilizerCode, backend: str = "index") -> ProtocolOutcome:
    errors = code.correctable
    labels = tuple(e.symbols() for e in errors)
    r = len(code.generators)
    if backend == "index":
        zero = BellString.zeros(2, code.n)
        table = {}
        syndromes = {}
        for lab, err in zip(labels, errors):
            syn = bilateral_syndrome(code, pauli_shift(err, zero))
            syndromes[lab] = syn
            table[(lab, (), syn)] = 1.0 / len(errors)
        dist = JointDistribution(("X", "A", "B"), table)
        transcripts = sorted({((), s) for s in syndromes.values()})
        regs = tuple(Register(t, "whole", 2**code.m, None, 1.0) for t in transcripts) if code.m else ()
        ledger = Ledger(
            n_bits=2.0 * code.n,
            E_i=float(code.n),
            E_f=float(code.m),
            I_A=mutual_info(dist, "X", "A"),
            I_B=conditional_mutual_info(dist, "X", "B", "A"),
            I_total=mutual_info(dist, "X", ["A", "B"]),
            E_distilled=float(code.m) if code.m else 0.0,
            distribution=dist,
            dims=(2**code.n, 2**code.n),
            step_entanglement=(float(code.n), float(code.m)),
            registers=regs,
        ).check()
        identified = {((), s): lab for lab, s in syndromes.items()}
        extras = {"syndromes": syndromes, "distinct_syndromes": len(set(syndromes.values()))}
        return ProtocolOutcome("error_correct_distill", "index", ledger, identified, regs, extras)
    if backend != "matrix":
        raise ConfigError(f"unknown backend {backend!r}")

    dim = 2**code.n
    dims = BipartiteDims(dim, dim, (2,) * code.n, (2,) * code.n)
    phi = np.eye(dim, dtype=complex) / np.sqrt(dim)
    items = tuple((1.0 / len(errors), PureState((phi @ e.matrix().T).ravel(), dims)) for e in errors)
    ensemble = Ensemble(items, labels)
    gens = [g.matrix() for g in code.generators]
    gens_conj = [g.conj() for g in gens]
    synd = list(product((0, 1), repeat=r))
    alice_ops = {s: code.correction(s).matrix() @ _projector(gens, s, dim) for s in synd}
    bob_proj = {s: _projector(gens_conj, s, dim) for s in synd}

    def bob_for(t):
        (a,) = t[0]
        ea_t = code.correction(a).matrix().T
        ops = {}
        for b in synd:
            s_u = tuple(x ^ y for x, y in zip(a, b))
            c = (code.correction(s_u).matrix() @ ea_t).conj().T
            ops[b] = c @ bob_proj[b]
        return Instrument.projective(ops, "B")

    protocol = OneWayProtocol((AliceMeasure(Instrument.projective(alice_ops, "A")), BobMeasure(bob_for)))
    ledger = run_protocol(ensemble, protocol)
    ref = (_projector(gens, (0,) * r, dim) @ phi).ravel()
    ref = ref / np.linalg.norm(ref)
    fidelity: dict = {}
    for t, comp in ledger.final.branches.items():
        for x, (_, psi) in comp.items():
            f = abs(np.vdot(ref, psi.ravel())) ** 2
            fidelity[labels[x]] = min(fidelity.get(labels[x], 1.0), float(f))
    identified = {}
    for (x, ta, tb), _ in ledger.distribution.table.items():
        identified.setdefault((ta, tb), set()).add(x)
    identified = {t: (next(iter(v)) if len(v) == 1 else None) for t, v in identified.items()}
    extras = {"fidelity": fidelity}
    return ProtocolOutcome("error_correct_distill", "matrix", ledger, identified, ledger.registers, extras)


# ----------------------------------------------------------------------
# recurrence
# ----------------------------------------------------------------------


def _check_recurrence_input(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    _, success = recurrence_map(p)
    if success >= 1 - 1e-12:
        raise DegenerateInputError("recurrence round is deterministic for this input (success probability 1)")
    return p


def recurrence_ledger(p: Sequence[float], backend: str = "index") -> ProtocolOutcome:
    """One recurrence round on two iid pairs; on failure the kept pair is measured out.

    X = the two hidden labels; transcript = the comparison bit.  The kept pair
    stays maximally entangled (but unidentified) on success, so E_f is the
    success probability and the gap 2 - s - h(s) is strictly positive.
    """
    p = _check_recurrence_input(p)
    p_prime, success = recurrence_map(p)
    extras = {"p_prime": p_prime, "success": success}
    if backend == "matrix":
        return _recurrence_matrix(p, extras)
    if backend != "index":
        raise ConfigError(f"unknown backend {backend!r}")
    table = {}
    for i, j in product(range(4), repeat=2):
        if p[i] * p[j] == 0:
            continue
        a, b = BellIndex.from_bit_index(i), BellIndex.from_bit_index(j)
        src, tgt = csum_d(a, b)
        c = tgt.m
        table[((a.label, b.label), (), (c,))] = table.get(((a.label, b.label), (), (c,)), 0.0) + p[i] * p[j]
    dist = JointDistribution(("X", "A", "B"), table)
    ledger = Ledger(
        n_bits=4.0,
        E_i=2.0,
        E_f=success,
        I_A=mutual_info(dist, "X", "A"),
        I_B=conditional_mutual_info(dist, "X", "B", "A"),
        I_total=mutual_info(dist, "X", ["A", "B"]),
        E_distilled=0.0,
        distribution=dist,
        dims=(4, 4),
        step_entanglement=(2.0, 2.0, success),
    ).check()
    extras["expected_I"] = binary_entropy(success)
    return ProtocolOutcome("recurrence", "index", ledger, {}, (), extras)


def _recurrence_matrix(p: np.ndarray, extras: dict) -> ProtocolOutcome:
    strings, probs, labels = [], [], []
    for i, j in product(range(4), repeat=2):
        if p[i] * p[j] == 0:
            continue
        a, b = BellIndex.from_bit_index(i), BellIndex.from_bit_index(j)
        strings.append([a.label, b.label])
        labels.append((a.label, b.label))
        probs.append(p[i] * p[j])
    fd = (2, 2)
    states = [canonical_product([gen_bell(2, *lab) for lab in s]) for s in strings]
    e = Ensemble(tuple(zip(probs, states)), tuple(labels))
    u = on_factors(sum_gate(2), [0, 1], fd)
    z = np.eye(2)
    alice = Instrument.projective(basis_projectors({1: z}, fd), "A")
    bob_pair2 = basis_projectors({1: z}, fd)
    bob_both = basis_projectors({0: z, 1: z}, fd)

    def bob_for(t):
        (a,) = t[0]
        ops = {}
        for (b,), proj in bob_pair2.items():
            if b == a[0]:
                ops[("keep", b)] = proj
            else:
                for (k0, k1), pr in bob_both.items():
                    if k1 == b:
                        ops[("drop", b, k0)] = pr
        return Instrument.projective(ops, "B")

    protocol = OneWayProtocol((LocalUnitary(u, u), AliceMeasure(alice), BobMeasure(bob_for)))
    ledger = run_protocol(e, protocol)
    return ProtocolOutcome("recurrence", "matrix", ledger, {}, ledger.registers, extras)
