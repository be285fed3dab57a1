from __future__ import annotations

import itertools

import numpy as np
import pytest

from locc_ledger.errors import CapacityError, ConfigError, ShapeError
from locc_ledger.linalg import partial_trace
from locc_ledger.states import (
    BipartiteDims,
    Ensemble,
    MixedState,
    PureState,
    bell,
    bell_diagonal,
    bell_string_state,
    canonical_product,
    ensemble_from_config,
    ensemble_to_config,
    gen_bell,
    product_state,
    tensor_power_canonical,
    uniform_bell_ensemble,
)

from . import oracles as O


@pytest.mark.parametrize("d", [2, 3, 4])
def test_gen_bell_matches_formula_and_completes(d):
    total = np.zeros((d * d, d * d), dtype=complex)
    for n, m in itertools.product(range(d), repeat=2):
        s = gen_bell(d, n, m)
        assert np.allclose(s.matrix, O.bell_tensor(d, n, m))
        total += s.density()
    assert np.allclose(total, np.eye(d * d), atol=1e-9)


def test_qubit_bell_labels():
    assert bell(1).equals_up_to_phase(gen_bell(2, 0, 0))
    assert bell(2).equals_up_to_phase(gen_bell(2, 1, 0))
    assert bell(3).equals_up_to_phase(gen_bell(2, 0, 1))
    assert bell(4).equals_up_to_phase(gen_bell(2, 1, 1))
    with pytest.raises(ConfigError):
        bell(5)


def test_canonical_ordering():
    labels = [(1, 0), (0, 1), (1, 1)]
    s = bell_string_state(2, labels)
    assert s.dims == BipartiteDims.pairs(2, 3)
    assert np.allclose(s.amplitudes, O.string_tensor(2, labels).ravel())


@pytest.mark.parametrize("d,k", [(2, 2), (2, 3), (3, 2)])
def test_power_commutes_with_partial_trace(d, k):
    rng = np.random.default_rng(d * 10 + k)
    v = rng.standard_normal(d * d) + 1j * rng.standard_normal(d * d)
    s = PureState(v / np.linalg.norm(v), BipartiteDims(d, d))
    p = tensor_power_canonical(s, k)
    ra = partial_trace(p.density(), d**k, d**k, "A")
    r1 = partial_trace(s.density(), d, d, "A")
    expect = r1
    for _ in range(k - 1):
        expect = np.kron(expect, r1)
    assert np.allclose(ra, expect, atol=1e-9)


def test_product_state_and_validation():
    s = product_state([1, 0], [0, 1, 0])
    assert s.dims == BipartiteDims(2, 3)
    with pytest.raises(ConfigError):
        PureState(np.array([1, 1]), BipartiteDims(2, 1))
    with pytest.raises(ShapeError):
        PureState(np.array([1, 0, 0]), BipartiteDims(2, 2))
    with pytest.raises(ConfigError):
        MixedState(np.diag([1.0, 1.0]), BipartiteDims(2, 1))
    with pytest.raises(ShapeError):
        BipartiteDims(4, 4, (2, 3))
    with pytest.raises(CapacityError):
        BipartiteDims(128, 128)


def test_ensemble_invariants():
    e = uniform_bell_ensemble(2, 2)
    assert len(e) == 4 and e.labels == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert e.dims == BipartiteDims.pairs(2, 2)
    with pytest.raises(ConfigError):
        Ensemble(((0.5, bell(1)), (0.6, bell(2))))
    with pytest.raises(ShapeError):
        Ensemble(((0.5, bell(1)), (0.5, gen_bell(3, 0, 0))))
    with pytest.raises(ConfigError):
        Ensemble(((0.5, bell(1)), (0.5, bell(2))), labels=("a", "a"))
    with pytest.raises(CapacityError):
        uniform_bell_ensemble(2, 7)


def test_bell_diagonal():
    p = [0.9, 0.1 / 3, 0.1 / 3, 0.1 / 3]
    rho = bell_diagonal(p)
    assert np.real(bell(1).amplitudes.conj() @ rho.matrix @ bell(1).amplitudes) == pytest.approx(0.9)
    with pytest.raises(ConfigError):
        bell_diagonal([0.5, 0.5, 0.5, -0.5])


def test_canonical_product_mixed_dims():
    s = canonical_product([gen_bell(2, 0, 0), gen_bell(3, 1, 2)])
    assert s.dims.a_factors == (2, 3) and s.dims.b_factors == (2, 3)


def test_ensemble_config_round_trip():
    e = uniform_bell_ensemble(3, 1)
    back = ensemble_from_config(ensemble_to_config(e))
    assert back.labels == e.labels
    assert back.dims == e.dims
    for (p, s), (q, t) in zip(e.items, back.items):
        assert p == q and s.fidelity(t) == pytest.approx(1)
    named = ensemble_from_config({"constructor": "uniform_bell_ensemble", "params": {"d": 2, "copies": 1}})
    assert len(named) == 4
    with pytest.raises(ConfigError):
        ensemble_from_config({"constructor": "missing"})
    with pytest.raises(ConfigError):
        ensemble_from_config({"dims": {"dA": 2}})
