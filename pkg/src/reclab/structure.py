"""Effective support, effective dimension and the reduced state psi^S."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import SpectralState, StateError, validate_state


@dataclass(frozen=True)
class SupportSet:
    indices: tuple[int, ...]
    mass: float
    delta: float

    @property
    def size(self) -> int:
        return len(self.indices)

    def to_json(self) -> dict:
        return {"indices": list(self.indices), "mass": self.mass, "delta": self.delta}


def effective_support(state: SpectralState, delta: float) -> SupportSet:
    """Smallest set of eigenvectors carrying probability at least 1 - delta.

    Taking probabilities in descending order (ties by index) and stopping
    at the first prefix that reaches the target is cardinality-optimal.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    p = state.probabilities
    order = np.argsort(-p, kind="stable")
    cum = np.cumsum(p[order])
    target = 1.0 - delta
    if delta == 0.0:
        n = int(np.count_nonzero(p))
    else:
        # tolerate the last-ulp shortfall of a cumulative sum that should reach the target
        n = int(np.searchsorted(cum, target - 1e-14, side="left")) + 1
        n = min(n, p.size)
    idx = tuple(sorted(int(i) for i in order[:n]))
    return SupportSet(idx, float(np.sum(p[list(idx)])), delta)


def effective_dimension(state: SpectralState) -> float:
    """Inverse participation ratio 1 / sum_k p_k^2."""
    p = state.probabilities
    return 1.0 / float(np.dot(p, p))


def reduce_state(state: SpectralState, support: SupportSet) -> SpectralState:
    """Keep only amplitudes in the support and renormalize.

    The fidelity between psi_t and psi^S_t is the support mass m at every
    t, so the triangle inequality gives D(psi_0, psi_t) <= D(psi^S_0, psi^S_t)
    + 2 sqrt(1 - m).  The tighter sqrt(2 delta) gap does not hold in general:
    weights (1 - delta, delta) on two levels reach 2 sqrt(delta (1 - delta)).
    """
    idx = list(support.indices)
    if not idx:
        raise StateError("empty support")
    amp = np.asarray(state.amplitudes)[idx]
    mass = float(np.sum(np.abs(amp) ** 2))
    if mass <= 0:
        raise StateError("support carries zero mass")
    return validate_state(np.asarray(state.eigenvalues)[idx], amp / math.sqrt(mass))


def eta_dimension(eta: float, d: int) -> float:
    """Closed-form d_eff of the state with one weight eta and d - 1 equal weights."""
    return (d - 1) / (d * eta * eta + 1 - 2 * eta)
