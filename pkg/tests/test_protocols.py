from __future__ import annotations

import math

import numpy as np
import pytest

from locc_ledger.bell import StabilizerCode, block_pairing, displayed_qutrit_pairing
from locc_ledger.errors import ConfigError, DegenerateInputError
from locc_ledger.info import binary_entropy
from locc_ledger.protocols import (
    bxor_chain,
    bxor_chain_ops,
    ebit_assisted_discrimination,
    error_correct_distill,
    full_info_then_keep,
    pair_fidelity,
    qutrit_two_copy_partial,
    recurrence_ledger,
    two_copy_discrimination,
)

L3 = math.log2(3)
FIELDS = ("n_bits", "E_i", "E_f", "I_A", "I_B", "I_total", "E_distilled")


def _values(outcome):
    return np.array([getattr(outcome.ledger, f) for f in FIELDS])


CASES = [
    ("two_copy d=2", lambda b: two_copy_discrimination(2, b)),
    ("two_copy d=3", lambda b: two_copy_discrimination(3, b)),
    ("full_info 3", lambda b: full_info_then_keep(3, b)),
    ("full_info 4", lambda b: full_info_then_keep(4, b)),
    ("bxor 3", lambda b: bxor_chain(3, b)),
    ("bxor 4", lambda b: bxor_chain(4, b)),
    ("qutrit partial", lambda b: qutrit_two_copy_partial(b)),
    ("ebit d=2", lambda b: ebit_assisted_discrimination(2, b)),
    ("ebit d=3", lambda b: ebit_assisted_discrimination(3, b)),
    ("ebit singleton", lambda b: ebit_assisted_discrimination(2, b, singleton=True)),
    ("ec bitflip3", lambda b: error_correct_distill(StabilizerCode.builtin("bitflip3"), b)),
    ("ec trivial:2", lambda b: error_correct_distill(StabilizerCode.builtin("trivial:2"), b)),
    ("recurrence", lambda b: recurrence_ledger([0.7, 0.1, 0.1, 0.1], b)),
]


@pytest.mark.parametrize("name,make", CASES, ids=[c[0] for c in CASES])
def test_backends_agree(name, make):
    idx, mat = make("index"), make("matrix")
    assert np.allclose(_values(idx), _values(mat), atol=1e-7), (_values(idx), _values(mat))
    assert idx.ledger.violations() == [] and mat.ledger.violations() == []


def test_two_copy_values():
    o = two_copy_discrimination(2)
    assert (o.ledger.I_total, o.ledger.E_f, o.ledger.gap) == pytest.approx((2, 0, 0), abs=1e-9)
    assert all(v is not None for v in o.identified.values())
    o3 = two_copy_discrimination(3)
    assert o3.ledger.I_total == pytest.approx(2 * L3)
    assert o3.ledger.E_f == pytest.approx(0, abs=1e-12)


def test_full_info_then_keep():
    o = full_info_then_keep(3)
    led = o.ledger
    assert (led.n_bits, led.E_i, led.I_total, led.E_f, led.E_distilled) == pytest.approx((6, 3, 2, 1, 1))
    assert abs(led.gap) < 1e-9
    with pytest.raises(ConfigError):
        full_info_then_keep(1)


def test_bxor_chain_three_and_four():
    o = bxor_chain(3)
    assert (o.ledger.I_total, o.ledger.E_distilled, o.ledger.E_f) == pytest.approx((1, 2, 2))
    o4 = bxor_chain(4)
    assert (o4.ledger.I_total, o4.ledger.E_distilled) == pytest.approx((2, 2))
    assert abs(o4.ledger.gap) < 1e-9
    with pytest.raises(ConfigError):
        bxor_chain_ops(2)


@pytest.mark.parametrize("n", [5, 6, 7])
def test_bxor_chain_longer_saturates(n):
    o = bxor_chain(n)
    assert abs(o.ledger.gap) < 1e-9
    assert o.ledger.E_distilled == pytest.approx(o.ledger.E_f)


def test_bxor_chain_registers_are_phi00():
    o = bxor_chain(3, "matrix")
    for j in (0, 1):
        fid = pair_fidelity(o.ledger, j)
        assert len(fid) == 4 and min(fid.values()) >= 1 - 1e-9


def test_qutrit_partial():
    o = qutrit_two_copy_partial("matrix")
    assert o.ledger.I_total == pytest.approx(L3, abs=1e-7)
    assert o.ledger.E_distilled == pytest.approx(L3, abs=1e-7)
    assert o.extras["block_pairing_matches_display"]
    assert o.extras["block_pairing"] == displayed_qutrit_pairing() == block_pairing(3)
    # each label's post-CSUM pair: source (0, m), target (n, 2m)
    for (n, m), (src, tgt) in o.extras["post_csum"].items():
        assert src == (0, m) and tgt == (n, 2 * m % 3)


def test_ebit_assisted():
    o = ebit_assisted_discrimination(3)
    assert o.ledger.I_total == pytest.approx(2 * L3)
    s = ebit_assisted_discrimination(2, singleton=True)
    assert s.ledger.I_total == pytest.approx(0, abs=1e-12)
    assert s.ledger.gap == pytest.approx(2)
    with pytest.raises(ConfigError):
        ebit_assisted_discrimination(4)


def test_error_correction_matrix_fidelity():
    o = error_correct_distill(StabilizerCode.builtin("bitflip3"), "matrix")
    assert (o.ledger.I_total, o.ledger.E_f) == pytest.approx((2, 1), abs=1e-9)
    assert set(o.extras["fidelity"]) == {"III", "XII", "IXI", "IIX"}
    assert min(o.extras["fidelity"].values()) >= 1 - 1e-9


def test_error_correction_five_qubit_index():
    o = error_correct_distill(StabilizerCode.builtin("five_qubit"), "index")
    assert (o.ledger.I_total, o.ledger.E_f, o.ledger.gap) == pytest.approx((4, 1, 0), abs=1e-12)
    assert o.extras["distinct_syndromes"] == 16


def test_trivial_code_learns_nothing():
    o = error_correct_distill(StabilizerCode.builtin("trivial:2"))
    assert o.ledger.I_total == pytest.approx(0, abs=1e-12)
    assert o.ledger.E_f == pytest.approx(2)


def test_recurrence():
    p = [0.7, 0.1, 0.1, 0.1]
    o = recurrence_ledger(p)
    s = o.extras["success"]
    assert o.extras["p_prime"][0] > 0.7
    assert o.ledger.I_total == pytest.approx(binary_entropy(s))
    assert o.ledger.gap == pytest.approx(2 - s - binary_entropy(s))
    assert o.ledger.gap > 0
    u = recurrence_ledger([0.25] * 4)
    assert u.ledger.gap == pytest.approx(0.5)
    with pytest.raises(DegenerateInputError):
        recurrence_ledger([1, 0, 0, 0])
    with pytest.raises(ConfigError):
        recurrence_ledger([0.5, 0.5, 0.5, -0.5])
