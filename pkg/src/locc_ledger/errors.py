"""Exception hierarchy.

Configuration-type problems (bad shapes, out-of-range labels, capacity) derive
from ``ValueError`` so callers that only care about "bad input" can catch that.
"""

from __future__ import annotations


class LoccLedgerError(Exception):
    """Base class for all package errors."""


class ConfigError(LoccLedgerError, ValueError):
    """Invalid parameters, unknown names, violated preconditions."""


class CapacityError(ConfigError):
    """Requested Hilbert dimension exceeds the configured cap."""


class ShapeError(ConfigError):
    """Operand shapes do not match."""


class ContractError(ConfigError):
    """Input violates an operation contract (e.g. non-Hermitian matrix)."""


class PremiseError(ConfigError):
    """Protocol premise not met (e.g. source entropy too large for hashing)."""


class DegenerateInputError(ConfigError):
    """Input for which the requested protocol is trivial/deterministic."""


class UnsupportedMeasureError(ConfigError):
    """Entanglement bookkeeping requested for a mixed-component ensemble."""


class MessageOrderError(ConfigError):
    """A protocol would send classical information from Bob to Alice."""


class NumericError(LoccLedgerError, ArithmeticError):
    """Numerical routine failed (non-convergence, lost normalization)."""


class LedgerViolation(LoccLedgerError):
    """A ledger invariant (e.g. the complementarity inequality) failed."""
