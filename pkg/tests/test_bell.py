from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from locc_ledger.bell import (
    BellIndex,
    BellString,
    Op,
    PauliString,
    StabilizerCode,
    bilateral_hadamard,
    bilateral_phase,
    bilateral_syndrome,
    block_pairing,
    build_syndrome_table,
    bxor,
    csum_d,
    displayed_qutrit_pairing,
    effective_error,
    pauli_shift,
    recurrence_map,
    run_ops,
    symplectic,
    x_compare,
    x_compare_rule,
    z_compare,
    z_compare_rule,
)
from locc_ledger.errors import ConfigError

from . import oracles as O

LABELS2 = list(itertools.product(range(2), repeat=2))
LABELS3 = list(itertools.product(range(3), repeat=2))


@pytest.mark.parametrize("d", [2, 3])
def test_csum_matches_matrix_oracle(d):
    labels = list(itertools.product(range(d), repeat=2))
    for l1, l2 in itertools.product(labels, repeat=2):
        t = O.bilateral_csum(d, O.string_tensor(d, [l1, l2]), 0, 1)
        (got, f) = O.identify(d, t, 2)
        src, tgt = csum_d(BellIndex(d, *l1), BellIndex(d, *l2))
        assert got == (src.label, tgt.label)
        assert f == pytest.approx(1, abs=1e-9)


def test_bxor_is_csum_for_qubits():
    for l1, l2 in itertools.product(LABELS2, repeat=2):
        a, b = BellIndex(2, *l1), BellIndex(2, *l2)
        assert bxor(a, b) == csum_d(a, b)


def test_bxor_table():
    # phase flows target -> source, amplitude flows source -> target
    assert bxor(BellIndex(2, 0, 1), BellIndex(2, 0, 0)) == (BellIndex(2, 0, 1), BellIndex(2, 0, 1))
    assert bxor(BellIndex(2, 0, 0), BellIndex(2, 1, 0)) == (BellIndex(2, 1, 0), BellIndex(2, 1, 0))


@pytest.mark.parametrize("d", [2, 3])
def test_compare_rules_against_measurement(d):
    for n, m in itertools.product(range(d), repeat=2):
        pz = O.single_pair_outcomes(d, n, m, np.eye(d))
        px = O.single_pair_outcomes(d, n, m, O.fourier(d))
        assert pz.sum() == pytest.approx(1) and px.sum() == pytest.approx(1)
        for a, b in zip(*np.nonzero(pz > 1e-12)):
            assert z_compare_rule(d, a, b) == m
        for a, b in zip(*np.nonzero(px > 1e-12)):
            assert x_compare_rule(d, a, b) == n
        assert z_compare(BellIndex(d, n, m)) == m
        assert x_compare(BellIndex(d, n, m)) == n


@pytest.mark.parametrize("d", [2, 3])
def test_single_pauli_shifts(d):
    for (n, m), (zs, xs) in itertools.product(itertools.product(range(d), repeat=2), repeat=2):
        t = O.string_tensor(d, [(n, m)])
        op = np.linalg.matrix_power(O.x_gate(d), xs) @ np.linalg.matrix_power(O.z_gate(d), zs)
        got, _ = O.identify(d, O.apply_local(t, op, 1), 1)
        s = pauli_shift(PauliString(d, (zs,), (xs,)), BellString.from_labels(d, [(n, m)]))
        assert got == s.labels


def test_bilateral_rotations():
    for n, m in LABELS2:
        t = O.string_tensor(2, [(n, m)])
        hh = O.apply_local(O.apply_local(t, O.H, 0), O.H, 1)
        ss = O.apply_local(O.apply_local(t, O.S, 0), O.S.conj(), 1)
        assert O.identify(2, hh, 1)[0] == (bilateral_hadamard(BellIndex(2, n, m)).label,)
        assert O.identify(2, ss, 1)[0] == (bilateral_phase(BellIndex(2, n, m)).label,)
    assert bilateral_hadamard(BellIndex(2, 1, 0)).label == (0, 1)
    assert bilateral_phase(BellIndex(2, 0, 1)).label == (1, 1)


def test_bell_index_validation_and_bits():
    with pytest.raises(ConfigError):
        BellIndex(2, 2, 0)
    with pytest.raises(ConfigError):
        BellIndex(1, 0, 0)
    assert [BellIndex.from_bit_index(k).label for k in range(4)] == [(0, 0), (1, 0), (0, 1), (1, 1)]
    for k in range(4):
        assert BellIndex.from_bit_index(k).bit_index == k


def test_run_ops_consumes_and_records():
    s = BellString.from_labels(2, [(1, 1), (0, 1)])
    run = run_ops(s, [Op("csum", (0, 1)), Op("z", (1,))])
    assert run.final[1] is None
    assert run.transcript == (("z", 1, 0),)
    with pytest.raises(ConfigError):
        run_ops(s, [Op("z", (1,)), Op("x", (1,))])
    with pytest.raises(ConfigError):
        Op("csum", (0, 0))


def test_symplectic_and_syndromes():
    x1 = PauliString.from_symbols("XII")
    z1 = PauliString.from_symbols("ZII")
    assert symplectic(x1, z1) == 1
    assert symplectic(x1, x1) == 0
    code = StabilizerCode.builtin("bitflip3")
    assert code.syndrome(PauliString.from_symbols("XII")) == (1, 0)
    assert code.syndrome(PauliString.from_symbols("IXI")) == (1, 1)
    assert code.syndrome(PauliString.from_symbols("IIX")) == (0, 1)
    assert code.syndrome(PauliString.identity(3)) == (0, 0)


def test_five_qubit_code_table():
    code = StabilizerCode.builtin("five_qubit")
    assert code.n == 5 and code.m == 1
    syndromes = {code.syndrome(e) for e in code.correctable}
    assert len(syndromes) == 16
    assert all(e.weight <= 1 for e in code.correctable)


def test_code_parsing_rejects_bad_input():
    with pytest.raises(ConfigError):
        StabilizerCode.from_text("XX\nZI\n")  # anticommuting
    with pytest.raises(ConfigError):
        StabilizerCode.from_text("ZZI\nZZI\n")  # dependent
    with pytest.raises(ConfigError):
        StabilizerCode.builtin("nope")
    c = StabilizerCode.from_text("# comment\nZZI\nIZZ\n")
    assert c.m == 1


def test_trivial_code():
    c = StabilizerCode.builtin("trivial:2")
    assert c.n == 2 and c.m == 2 and len(c.generators) == 0


def test_bilateral_syndrome_is_commutation_with_effective_error():
    code = StabilizerCode.builtin("bitflip3")
    s = BellString.from_labels(2, [(0, 0), (0, 1), (0, 0)])
    assert effective_error(s).symbols() == "IXI"
    assert bilateral_syndrome(code, s) == (1, 1)


def test_build_table_prefers_low_weight():
    gens = StabilizerCode.builtin("bitflip3").generators
    table = build_syndrome_table(3, gens)
    assert table[(1, 1)].symbols() == "IXI"


def test_recurrence_map_oracle():
    p = np.array([0.7, 0.1, 0.1, 0.1])
    q, success = recurrence_map(p)
    # survivors: both amplitudes equal; phase of source is n1 xor n2
    assert success == pytest.approx((0.7 + 0.1) ** 2 + (0.1 + 0.1) ** 2)
    assert q[0] == pytest.approx((0.7**2 + 0.1**2) / success)
    assert q[0] > 0.7
    assert q.sum() == pytest.approx(1)


def test_block_pairing_matches_display():
    assert block_pairing(3) == displayed_qutrit_pairing()
    # every source block has three images for qutrits
    assert all(len(v) == 3 for v in block_pairing(3).values())


@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=2, max_size=4), st.data())
def test_csum_is_invertible(labels, data):
    d = 3
    k = len(labels)
    s, t = data.draw(st.lists(st.integers(0, k - 1), min_size=2, max_size=2, unique=True))
    a, b = BellIndex(d, *labels[s]), BellIndex(d, *labels[t])
    x, y = a, b
    for _ in range(d):  # CSUM has order d
        x, y = csum_d(x, y)
    assert (x, y) == (a, b)


@given(st.lists(st.sampled_from(LABELS2), min_size=1, max_size=6), st.lists(st.sampled_from("IXYZ"), min_size=6, max_size=6))
def test_pauli_shift_composes(labels, syms):
    k = len(labels)
    e = PauliString.from_symbols("".join(syms[:k]))
    s = BellString.from_labels(2, labels)
    assert pauli_shift(e, pauli_shift(e, s)) == s
    assert effective_error(pauli_shift(e, BellString.zeros(2, k))) == e
