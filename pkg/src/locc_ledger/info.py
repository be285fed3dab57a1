"""Entropies, Holevo quantities, entanglement entropy and mutual information.

All logarithms are base 2 with ``0 log 0 = 0``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, NumericError, UnsupportedMeasureError
from .linalg import clip_spectrum, eigvalsh, is_density_matrix, partial_trace
from .states import Ensemble, MixedState, PureState

PROB_TOL = 1e-9


def _entropy_of(w: np.ndarray) -> float:
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w))) if w.size else 0.0


def shannon(p: Iterable[float]) -> float:
    p = np.asarray(list(p), dtype=float)
    if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1) > PROB_TOL:
        raise ConfigError(f"not a probability distribution: {p}")
    return _entropy_of(p)


def binary_entropy(q: float) -> float:
    return shannon([q, 1 - q])


def spectrum_entropy(w) -> float:
    return _entropy_of(clip_spectrum(w))


def vn_entropy(rho) -> float:
    """Von Neumann entropy of a density matrix (MixedState/PureState or array)."""
    if isinstance(rho, PureState):
        return 0.0
    m = rho.matrix if isinstance(rho, MixedState) else np.asarray(rho, dtype=complex)
    if not is_density_matrix(m, 1e-8):
        raise ConfigError("vn_entropy needs a density matrix")
    return spectrum_entropy(eigvalsh(m))


def schmidt_coefficients(psi: np.ndarray) -> np.ndarray:
    """Squared Schmidt coefficients (descending) of a dA x dB amplitude matrix."""
    try:
        s = np.linalg.svd(psi, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericError(str(exc)) from exc
    return s**2


def entropy_of_amplitudes(psi: np.ndarray) -> float:
    """Entanglement entropy straight from an amplitude matrix (SVD route)."""
    return _entropy_of(schmidt_coefficients(psi))


def ent_entropy(s: PureState) -> float:
    rho_a = partial_trace(s.density(), s.dims.dA, s.dims.dB, "A")
    return vn_entropy(rho_a)


def avg_entanglement(e: Ensemble) -> float:
    if not e.is_pure:
        raise UnsupportedMeasureError("average entanglement is only defined for pure-component ensembles")
    return float(sum(p * entropy_of_amplitudes(s.matrix) for p, s in e.items))


def holevo(e: Ensemble) -> float:
    avg = vn_entropy(e.average())
    return avg - float(sum(p * vn_entropy(s) for p, s in e.items))


def holevo_of(probs: Sequence[float], rhos: Sequence[np.ndarray]) -> float:
    """Holevo quantity for raw density matrices (used on reduced ensembles)."""
    probs = np.asarray(probs, dtype=float)
    avg = sum(p * r for p, r in zip(probs, rhos))
    return spectrum_entropy(eigvalsh(avg)) - float(
        sum(p * spectrum_entropy(eigvalsh(r)) for p, r in zip(probs, rhos))
    )


def reduced_ensemble(e: Ensemble, side: str) -> tuple[np.ndarray, list[np.ndarray]]:
    d = e.dims
    return e.probabilities, [partial_trace(s.density(), d.dA, d.dB, side) for s in e.states]


# ----------------------------------------------------------------------
# classical joint distributions
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class JointDistribution:
    """Sparse table over named axes; keys are tuples ordered like ``axes``."""

    axes: tuple[str, ...]
    table: Mapping[tuple, float]

    def __post_init__(self):
        if len(set(self.axes)) != len(self.axes):
            raise ConfigError("axis names must be distinct")
        table = {}
        for key, p in self.table.items():
            if len(key) != len(self.axes):
                raise ConfigError(f"key {key} does not match axes {self.axes}")
            if p < 0:
                raise ConfigError("negative probability")
            if p > 0:
                table[tuple(key)] = table.get(tuple(key), 0.0) + float(p)
        total = sum(table.values())
        if abs(total - 1) > PROB_TOL:
            raise ConfigError(f"joint distribution sums to {total}")
        object.__setattr__(self, "table", table)

    def marginal(self, axes: Sequence[str]) -> dict[tuple, float]:
        idx = [self._index(a) for a in axes]
        out: dict[tuple, float] = defaultdict(float)
        for key, p in self.table.items():
            out[tuple(key[i] for i in idx)] += p
        return dict(out)

    def entropy(self, axes: Sequence[str]) -> float:
        if not axes:
            return 0.0
        return _entropy_of(np.fromiter(self.marginal(axes).values(), dtype=float))

    def _index(self, axis: str) -> int:
        try:
            return self.axes.index(axis)
        except ValueError:
            raise ConfigError(f"unknown axis {axis!r}; have {self.axes}") from None


def _nonneg(v: float) -> float:
    # information quantities are >= 0; only round-off can push them below
    return 0.0 if -1e-12 < v < 0 else v


def _axis_list(x) -> list[str]:
    return [x] if isinstance(x, str) else list(x)


def mutual_info(j: JointDistribution, left, right) -> float:
    left, right = _axis_list(left), _axis_list(right)
    if set(left) & set(right):
        raise ConfigError("axis groups must be disjoint")
    return _nonneg(j.entropy(left) + j.entropy(right) - j.entropy(left + right))


def conditional_mutual_info(j: JointDistribution, left, right, given) -> float:
    """I(left; right | given); zero-probability conditions drop out naturally."""
    left, right, given = _axis_list(left), _axis_list(right), _axis_list(given)
    if set(left) & set(right) or set(given) & (set(left) | set(right)):
        raise ConfigError("axis groups must be disjoint")
    return _nonneg(
        j.entropy(left + given)
        + j.entropy(right + given)
        - j.entropy(left + right + given)
        - j.entropy(given)
    )
