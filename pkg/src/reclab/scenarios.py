"""Canned scenarios.

The qutrit scenario mixes a slow and a fast frequency: weights
(1/2, 1/2 - delta, delta) on energies (0, 1, ratio) with delta = eps^2.
Early on the fast level drives exits and returns on the 1/ratio scale;
once the slow phase drifts, the state stays away for a time of order one.
The longest gap between consecutive returns, measured in units of the exit
time, therefore grows with ratio without bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .spectral import SpectralState, from_probabilities
from .timing import CrossingQuery, TimingCertificate, find_recurrences


class ScenarioError(ValueError):
    pass


def qutrit_state(eps: float, ratio: float, delta: Optional[float] = None) -> SpectralState:
    delta = eps * eps if delta is None else delta
    if not delta > 0:
        raise ScenarioError("delta must be positive; delta = 0 is a two-level system with one timescale")
    return from_probabilities([0.0, 1.0, ratio], [0.5, 0.5 - delta, delta])


@dataclass
class QutritReport:
    epsilon: float
    ratio: float
    horizon: float
    certificate: TimingCertificate
    max_gap: Optional[float]
    gap_ratio: Optional[float]
    gap_start: Optional[float]

    @property
    def recurrences(self) -> list:
        return self.certificate.recurrences

    def to_json(self) -> dict:
        rec = self.recurrences
        return {
            "epsilon": self.epsilon,
            "ratio": self.ratio,
            "horizon": self.horizon,
            "t_exit": self.certificate.t_exit,
            "n_recurrences": len(rec),
            "first_recurrences": rec[:10],
            "max_gap": self.max_gap,
            "max_gap_over_t_exit": self.gap_ratio,
            "gap_start": self.gap_start,
            "status": self.certificate.status.value,
            "evaluations": self.certificate.evaluations,
        }


def qutrit_scenario(eps: float = 0.1, ratio: float = 1e4, horizon: Optional[float] = None,
                    max_recurrences: int = 100_000) -> QutritReport:
    """Recurrences of the two-timescale qutrit up to ``horizon``.

    The default horizon 4 pi covers the first slow return (period 2 pi of
    the slow level).  Running into the horizon is the normal way this
    search ends.
    """
    if not 0.0 < eps <= 0.3:
        raise ScenarioError("epsilon must lie in (0, 0.3]")
    if ratio < 10:
        raise ScenarioError("ratio must be >= 10")
    horizon = 4 * math.pi if horizon is None else horizon
    state = qutrit_state(eps, ratio)
    cert = find_recurrences(state, CrossingQuery(eps, t_max=horizon, k=max_recurrences))
    rec = cert.recurrences
    max_gap = gap_ratio = start = None
    if len(rec) >= 2:
        gaps = np.diff(rec)
        i = int(np.argmax(gaps))
        max_gap = float(gaps[i])
        start = float(rec[i])
        gap_ratio = max_gap / cert.t_exit
    return QutritReport(eps, ratio, horizon, cert, max_gap, gap_ratio, start)


def qutrit_sweep(eps: float = 0.1, ratios: Sequence[float] = (1e2, 1e3, 1e4),
                 horizon: Optional[float] = None) -> tuple[list, bool]:
    """Reports for each ratio and whether the gap ratio increases along the sweep."""
    reports = [qutrit_scenario(eps, r, horizon) for r in ratios]
    g = [r.gap_ratio for r in reports]
    monotone = all(a is not None for a in g) and all(a < b for a, b in zip(g, g[1:]))
    return reports, monotone
