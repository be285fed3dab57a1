"""One-way LOCC ledgers: accessible information versus retained entanglement
for ensembles of bipartite pure states."""

from .errors import ConfigError, LedgerViolation, NumericError
from .locc import AliceMeasure, BobMeasure, Discard, Instrument, Ledger, LocalUnitary, OneWayProtocol, run_protocol
from .states import BipartiteDims, Ensemble, PureState, bell, gen_bell, uniform_bell_ensemble

__version__ = "0.1.0"

__all__ = [
    "AliceMeasure",
    "BipartiteDims",
    "BobMeasure",
    "ConfigError",
    "Discard",
    "Ensemble",
    "Instrument",
    "Ledger",
    "LedgerViolation",
    "LocalUnitary",
    "NumericError",
    "OneWayProtocol",
    "PureState",
    "bell",
    "gen_bell",
    "run_protocol",
    "uniform_bell_ensemble",
]
