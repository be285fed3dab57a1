from __future__ import annotations

import pytest

from locc_ledger.errors import CapacityError, ConfigError
from locc_ledger.sweep import bound_trial, parse_dims, verify_bound


def test_parse_dims():
    assert parse_dims("2,3") == [(2, 2), (2, 3), (3, 2), (3, 3)]
    assert parse_dims("2x3,4x4") == [(2, 3), (4, 4)]
    assert parse_dims([(2, 5)]) == [(2, 5)]
    with pytest.raises(CapacityError):
        parse_dims("64x64")
    for bad in ("", "2x3,4", "a,b", "0x2"):
        with pytest.raises(ConfigError):
            parse_dims(bad)


def test_bound_trial_deterministic():
    a, b = bound_trial((3, 2), 4, 7), bound_trial((3, 2), 4, 7)
    assert a.ledger == b.ledger and a.ok


def test_small_sweep_clean():
    checks = verify_bound(60, "2,3,4", 11)
    assert len(checks) == 60 and all(c.ok for c in checks)
    assert verify_bound(0, "2", 0) == []
