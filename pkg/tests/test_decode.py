from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locc_ledger.decode import (
    decode_exact,
    decode_isd,
    label_costs,
    ml_decode,
    pack_labels,
    parity,
    solve_gf2,
    string_cost,
    unpack_labels,
)
from locc_ledger.errors import ConfigError

P = [0.9, 0.1 / 3, 0.1 / 3, 0.1 / 3]


def _brute(rows, bits, n, costs):
    best, arg = np.inf, None
    for x in range(4**n):
        if all(parity(r & x) == b for r, b in zip(rows, bits)):
            c = string_cost(x, n, costs)
            if c < best - 1e-9 or (abs(c - best) <= 1e-9 and unpack_labels(x, n) < unpack_labels(arg, n)):
                best, arg = c, x
    return arg, best


def test_pack_round_trip():
    labels = ((1, 0), (0, 1), (1, 1))
    assert unpack_labels(pack_labels(labels), 3) == labels


def test_label_costs_relative_to_mode():
    c = label_costs(P)
    assert c[0] == 0 and c[1] == pytest.approx(np.log2(0.9 / (0.1 / 3)))
    assert np.isinf(label_costs([1, 0, 0, 0])[1])


def test_solve_gf2_inconsistent():
    assert solve_gf2([0b11, 0b11], [0, 1], 2) is None
    x0, null = solve_gf2([0b01], [1], 2)
    assert x0 & 1 and len(null) == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_exact_matches_brute_force(seed, n):
    rng = np.random.default_rng(seed)
    truth = int(rng.integers(0, 4**n))
    rows = [int(r) for r in rng.integers(1, 4**n, size=int(rng.integers(1, 2 * n)))]
    bits = [parity(r & truth) for r in rows]
    costs = label_costs(P)
    res = decode_exact(rows, bits, n, costs)
    arg, best = _brute(rows, bits, n, costs)
    assert res.best == arg and res.cost == pytest.approx(best)


def test_isd_agrees_with_exact_on_moderate_sizes():
    costs = label_costs(P)
    rng = np.random.default_rng(0)
    n = 16
    for _ in range(10):
        labels = [tuple(int(v) for v in divmod(int(k), 2)[::-1]) for k in rng.choice(4, n, p=P)]
        truth = pack_labels(labels)
        rows = [int.from_bytes(rng.bytes(4), "little") for _ in range(22)]
        bits = [parity(r & truth) for r in rows]
        ex = decode_exact(rows, bits, n, costs)
        isd = decode_isd(rows, bits, n, costs, np.random.default_rng(1))
        assert isd.cost == pytest.approx(ex.cost)


def test_ml_decode_dispatch():
    with pytest.raises(ConfigError):
        ml_decode([1], [1], 2, P, method="magic")
    with pytest.raises(ConfigError):
        decode_exact([], [], 40, label_costs(P))
    res = ml_decode([0b11], [1], 2, P)
    assert res.exact and res.best in (0b01, 0b10)


def test_inconsistent_parities_give_no_answer():
    res = ml_decode([0b1, 0b1], [0, 1], 2, P)
    assert res.best is None
