from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locc_ledger.errors import CapacityError, ContractError, NumericError, ShapeError
from locc_ledger.linalg import (
    MAX_DIM,
    as_matrix,
    clip_spectrum,
    eigh,
    eigvalsh,
    is_density_matrix,
    is_unitary,
    kron,
    partial_trace,
)


def _random_density(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    r = g @ g.conj().T
    return r / np.trace(r)


def test_as_matrix_rejects():
    with pytest.raises(ShapeError):
        as_matrix([1, 2, 3])
    with pytest.raises(ContractError):
        as_matrix([[np.nan]])


def test_kron_and_cap():
    assert np.allclose(kron(np.eye(2), [[0, 1], [1, 0]]), np.kron(np.eye(2), [[0, 1], [1, 0]]))
    with pytest.raises(CapacityError):
        kron(np.eye(MAX_DIM), np.eye(2))


def test_partial_trace_of_product():
    rng = np.random.default_rng(1)
    a, b = _random_density(rng, 2), _random_density(rng, 3)
    rho = np.kron(a, b)
    assert np.allclose(partial_trace(rho, 2, 3, "A"), a)
    assert np.allclose(partial_trace(rho, 2, 3, "B"), b)
    with pytest.raises(ShapeError):
        partial_trace(rho, 3, 3, "A")
    with pytest.raises(ShapeError):
        partial_trace(rho, 2, 3, "C")


def test_eigh_sorted_and_reconstructs():
    rng = np.random.default_rng(2)
    h = _random_density(rng, 5)
    sp = eigh(h)
    assert np.all(np.diff(sp.eigenvalues) <= 1e-15)
    assert np.allclose(sp.reconstruct(), h, atol=1e-12)
    assert np.allclose(eigvalsh(h), sp.eigenvalues)
    with pytest.raises(ContractError):
        eigh(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ShapeError):
        eigh(np.zeros((2, 3)))


def test_density_and_unitary_predicates():
    assert is_density_matrix(np.eye(3) / 3)
    assert not is_density_matrix(np.eye(3))
    assert not is_density_matrix(np.diag([1.5, -0.5]))
    assert is_unitary(np.array([[0, 1], [1, 0]]))
    assert not is_unitary(np.eye(2) * 2)


def test_clip_spectrum():
    assert np.array_equal(clip_spectrum(np.array([0.5, -1e-14])), [0.5, 0.0])
    with pytest.raises(NumericError):
        clip_spectrum(np.array([1.0, -1e-3]))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_partial_trace_preserves_trace_and_psd(da, db, seed):
    rho = _random_density(np.random.default_rng(seed), da * db)
    for side in ("A", "B"):
        r = partial_trace(rho, da, db, side)
        assert is_density_matrix(r, 1e-9)
