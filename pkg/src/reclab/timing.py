"""Certified search for exit and recurrence times.

The trace distance D(t) = sqrt(1 - F(t)) is Lipschitz with constant
L = sqrt(var(H)).  From a point at distance gap = |D(t) - eps| from the
threshold, no crossing can happen within gap / L, so the march takes that
step (floored at ``dt_min``).  Each bracketed crossing is refined by
bisection.  A crossing can only be missed inside a ``dt_min`` step, and then
it is shallower than ``miss_tol = L * dt_min``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .bounds import finiteness, first_recurrence_bound
from .spectral import Propagator, SpectralState, moments


class Status(str, Enum):
    EXITED = "Exited"
    NEVER_EXITS = "NeverExitsAnalytic"
    HORIZON = "HorizonExhausted"


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class CrossingQuery:
    """Search parameters; ``None`` fields get defaults scaled by 1/L."""

    epsilon: float
    dt_min: Optional[float] = None
    t_max: Optional[float] = None
    refine_tol: Optional[float] = None
    k: int = 1
    max_evals: int = 50_000_000

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise QueryError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.k < 0:
            raise QueryError("k must be >= 0")
        if self.dt_min is not None and not self.dt_min > 0:
            raise QueryError("dt_min must be positive")
        if self.refine_tol is not None and not self.refine_tol > 0:
            raise QueryError("refine_tol must be positive")
        if self.t_max is not None and self.dt_min is not None and self.t_max < self.dt_min:
            raise QueryError("t_max must be >= dt_min")

    def resolved(self, lipschitz: float) -> "CrossingQuery":
        return replace(
            self,
            dt_min=self.dt_min if self.dt_min is not None else 1e-6 / lipschitz,
            refine_tol=self.refine_tol if self.refine_tol is not None else 1e-10 / lipschitz,
        )


@dataclass
class TimingCertificate:
    t_exit: Optional[float]
    recurrences: list = field(default_factory=list)
    miss_tol: float = 0.0
    status: Status = Status.EXITED
    evaluations: int = 0
    exits: list = field(default_factory=list)
    horizon: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "t_exit": self.t_exit,
            "recurrences": list(self.recurrences),
            "miss_tol": self.miss_tol,
            "status": self.status.value,
            "evaluations": self.evaluations,
        }


class _Search:
    """One marching run over a single state; counts distance evaluations."""

    def __init__(self, state: SpectralState, eps: float, lipschitz: float, q: CrossingQuery):
        self.prop = Propagator(state)
        self.eps = eps
        self.L = lipschitz
        self.dt_min = q.dt_min
        self.tol = q.refine_tol
        self.max_evals = q.max_evals
        self.evals = 0

    def D(self, t: float) -> float:
        self.evals += 1
        return self.prop.distance(t)

    def _bisect(self, lo: float, hi: float, outside: bool) -> float:
        # invariant: hi has crossed, lo has not; ties (D == eps) count as crossed
        eps = self.eps
        while hi - lo > self.tol:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            d = self.D(mid)
            if (d >= eps) if outside else (d <= eps):
                hi = mid
            else:
                lo = mid
        return hi

    def march(self, t: float, t_max: float, outside: bool) -> Optional[float]:
        """First time after ``t`` with D >= eps (``outside``) or D <= eps.

        Returns None if ``t_max`` or the evaluation budget runs out first.
        """
        eps, L, dt_min = self.eps, self.L, self.dt_min
        d = self.D(t)
        while True:
            if self.evals >= self.max_evals or t >= t_max:
                return None
            step = max(dt_min, abs(eps - d) / L)
            nxt = min(t + step, t_max)
            dn = self.D(nxt)
            if (dn >= eps) if outside else (dn <= eps):
                return self._bisect(t, nxt, outside)
            t, d = nxt, dn


def _default_exit_horizon(L: float) -> float:
    return 1e9 / L


def find_exit(state: SpectralState, q: CrossingQuery) -> TimingCertificate:
    """Exit time: first t > 0 with D(t) >= eps.

    States that provably never reach distance eps (zero variance, or the
    phase-torus infimum criterion) are reported as ``NeverExitsAnalytic``
    without marching.
    """
    cert, _ = _exit(state, q)
    return cert


def _exit(state, q):
    eps = q.epsilon
    m = moments(state)
    L = m.lipschitz
    if L == 0.0 or not finiteness(state, eps).finite:
        return TimingCertificate(None, status=Status.NEVER_EXITS), None
    q = q.resolved(L)
    s = _Search(state, eps, L, q)
    t_max = q.t_max if q.t_max is not None else _default_exit_horizon(L)
    # speed limit: D(t) <= sin(L t) for L t <= pi/2, so nothing crosses before t0
    t0 = math.asin(eps) / L
    if t0 > t_max:
        return TimingCertificate(None, miss_tol=L * q.dt_min, status=Status.HORIZON, horizon=t_max), s
    if s.D(t0) >= eps:
        t_exit = t0
    else:
        t_exit = s.march(t0, t_max, outside=True)
    cert = TimingCertificate(
        t_exit,
        miss_tol=L * q.dt_min,
        status=Status.EXITED if t_exit is not None else Status.HORIZON,
        evaluations=s.evals,
        exits=[t_exit] if t_exit is not None else [],
        horizon=t_max,
    )
    return cert, s


def recurrence_horizon(state: SpectralState, eps: float, t_exit: float) -> float:
    """Default horizon min(10 * first-recurrence bound, 1e9 / L)."""
    L = moments(state).lipschitz
    cap = 1e9 / L
    if state.dim < 2:
        return cap
    b = first_recurrence_bound(eps, state.dim, t_exit)
    return cap if b.log10 + 1 > math.log10(cap) else min(10 * b.value, cap)


def find_recurrences(state: SpectralState, q: CrossingQuery) -> TimingCertificate:
    """Exit time followed by the first ``q.k`` recurrence times.

    Between recurrences the solver requires a fresh exit from the eps-ball,
    so consecutive returns are separated by an excursion.  If the horizon
    runs out, the recurrences found so far are returned with status
    ``HorizonExhausted``.
    """
    cert, s = _exit(state, q)
    if cert.status is not Status.EXITED or q.k == 0:
        return cert
    t_max = q.t_max if q.t_max is not None else recurrence_horizon(state, q.epsilon, cert.t_exit)
    cert.horizon = t_max
    t = cert.t_exit
    for j in range(q.k):
        if j > 0:
            t = s.march(t, t_max, outside=True)
            if t is None:
                break
            cert.exits.append(t)
        r = s.march(t, t_max, outside=False)
        if r is None:
            break
        cert.recurrences.append(r)
        t = r
    cert.evaluations = s.evals
    if len(cert.recurrences) < q.k:
        cert.status = Status.HORIZON
    return cert
