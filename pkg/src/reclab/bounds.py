"""Closed-form exit and recurrence time bounds.

Recurrence bounds grow like ``(c / eps)^(d - 1)`` and leave double range
quickly, so every such quantity is carried as a :class:`Bound` holding the
base-10 logarithm alongside the (possibly infinite) float value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .spectral import MomentSummary, SpectralState, moments


class BoundError(ValueError):
    """A bound was requested outside the regime where it is proved."""


@dataclass(frozen=True)
class Bound:
    log10: float

    @property
    def value(self) -> float:
        if self.log10 > 307.0:
            return math.inf
        return 10.0 ** self.log10

    @property
    def overflow(self) -> bool:
        return math.isinf(self.value)

    def __float__(self) -> float:
        return self.value

    def to_json(self):
        return "overflow" if self.overflow else self.value

    @classmethod
    def of(cls, prefactor: float, base: float = 1.0, exponent: float = 0.0) -> "Bound":
        """``prefactor * base**exponent`` evaluated in log space."""
        if prefactor < 0 or base <= 0:
            raise BoundError("bound prefactor must be >= 0 and base > 0")
        if prefactor == 0:
            return cls(-math.inf)
        return cls(math.log10(prefactor) + exponent * math.log10(base))


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise BoundError(f"epsilon must lie in (0, 1), got {eps}")


def mandelstam_tamm(eps: float, variance: float) -> float:
    """Lower bound arcsin(eps) / sqrt(variance) on the exit time."""
    _check_eps(eps)
    if variance <= 0:
        raise BoundError("zero variance: the state never moves")
    return math.asin(eps) / math.sqrt(variance)


def exit_upper(eps: float, m: MomentSummary) -> Optional[float]:
    """Inverse speed limit ``eps/sqrt(var) * (1 - eps/eps*)^(-1/2)``; None unless eps < eps*."""
    _check_eps(eps)
    if m.variance <= 0:
        raise BoundError("zero variance: the state never moves")
    if not eps < m.eps_star:
        return None
    return eps / math.sqrt(m.variance) / math.sqrt(1.0 - eps / m.eps_star)


def qsl_bounds(eps: float, m: MomentSummary) -> tuple[float, Optional[float]]:
    return mandelstam_tamm(eps, m.variance), exit_upper(eps, m)


def first_recurrence_bound(eps: float, d: int, t_exit: float) -> Bound:
    """t_exit * (4 pi / eps)^(d - 1)."""
    _check_eps(eps)
    if d < 2:
        raise BoundError("recurrence bounds need d >= 2")
    if not t_exit > 0:
        raise BoundError("t_exit must be positive")
    return Bound.of(t_exit, 4 * math.pi / eps, d - 1)


def kth_recurrence_bound(eps: float, d: int, k: int, t_exit_2eps: float) -> Bound:
    """k * t_exit(2 eps) * (8 pi / eps)^(d - 1)."""
    _check_eps(eps)
    if d < 2:
        raise BoundError("recurrence bounds need d >= 2")
    if k < 1:
        raise BoundError("k must be >= 1")
    if not 2 * eps < 1:
        raise BoundError("k-th recurrence bound needs 2*eps < 1")
    if not t_exit_2eps > 0:
        raise BoundError("t_exit(2 eps) must be positive")
    return Bound.of(k * t_exit_2eps, 8 * math.pi / eps, d - 1)


def concrete_recurrence_bound(eps: float, d: int, m: MomentSummary) -> Optional[Bound]:
    """eps / sqrt(2 var) * (4 pi / eps)^(d - 1), only for eps < eps*/2."""
    _check_eps(eps)
    if d < 2:
        raise BoundError("recurrence bounds need d >= 2")
    if m.variance <= 0 or not eps < m.eps_star / 2:
        return None
    return Bound.of(eps / math.sqrt(2 * m.variance), 4 * math.pi / eps, d - 1)


@dataclass(frozen=True)
class RecurrenceBounds:
    thm1: Bound
    kth: Optional[Bound]
    concrete: Optional[Bound]
    errors: dict = field(default_factory=dict)


def recurrence_bounds(eps, d, t_exit_eps, t_exit_2eps=None, k=None, m=None) -> RecurrenceBounds:
    """All state recurrence bounds at once.

    The first-recurrence bound is mandatory; the k-th and concrete variants
    come back as None with the reason recorded in ``errors`` when their
    preconditions fail.  ``t_exit_2eps`` is taken as given (measured or
    analytic), never substituted.
    """
    thm1 = first_recurrence_bound(eps, d, t_exit_eps)
    errors = {}
    kth = concrete = None
    if k is not None:
        if t_exit_2eps is None:
            errors["kth"] = "t_exit(2 eps) not supplied"
        else:
            try:
                kth = kth_recurrence_bound(eps, d, k, t_exit_2eps)
            except BoundError as exc:
                errors["kth"] = str(exc)
    if m is not None:
        concrete = concrete_recurrence_bound(eps, d, m)
        if concrete is None:
            errors["concrete"] = f"needs eps < eps*/2 = {m.eps_star / 2:.6g}"
    return RecurrenceBounds(thm1, kth, concrete, errors)


def reduced_bound(eps: float, t_exit: float, d_supp_quarter: int, d_supp_half: int) -> tuple[Bound, Bound]:
    """Effective-support bounds: exponent d_supp(eps^2/4) - 1 and the sharper d_supp(eps/2) - 1.

    Both are reported as stated, not certified.  Their derivation relies on
    a distance gap of sqrt(2 delta), which fails for some states; see
    :func:`reclab.structure.reduce_state`.  Passing d_supp(eps^2/16) as the
    first argument gives a version whose distance-gap step does hold.
    """
    _check_eps(eps)
    if d_supp_quarter < 1 or d_supp_half < 1:
        raise BoundError("supports must be >= 1")
    base = 8 * math.pi / eps
    return Bound.of(t_exit, base, d_supp_quarter - 1), Bound.of(t_exit, base, d_supp_half - 1)


def free_bound(eps: float, t_exit: float, d_single: int, n: int) -> Bound:
    """Non-interacting n-particle bound t_exit * (4 pi n / eps)^(d_single - 1)."""
    _check_eps(eps)
    if n < 1 or d_single < 2:
        raise BoundError("need n >= 1 and d_single >= 2")
    return Bound.of(t_exit, 4 * math.pi * n / eps, d_single - 1)


def unitary_bounds(eps: float, lambda_max: float, lambda_min: float, d: int) -> tuple[float, Bound]:
    """Exit and recurrence bounds for the unitary channel exp(iHt) under the diamond distance."""
    _check_eps(eps)
    width = lambda_max - lambda_min
    if not width > 0:
        raise BoundError("flat spectrum: the channel never moves")
    t_exit = math.pi * eps / width
    return t_exit, Bound.of(t_exit, 8 * math.pi / eps, d - 1)


@dataclass(frozen=True)
class Finiteness:
    finite: bool
    infimum: float
    threshold: float
    caveat: str = (
        "assumes rationally independent eigenvalues (not checked); "
        "uses the squared infimum (2 p_max - 1)^2 rather than the unsquared form"
    )


def torus_infimum(probabilities) -> float:
    """inf over phases of |sum_k p_k e^{i phi_k}|^2, i.e. max(2 p_max - 1, 0)^2."""
    p_max = float(np.max(probabilities))
    return max(2.0 * p_max - 1.0, 0.0) ** 2


def finiteness(state: SpectralState, eps: float) -> Finiteness:
    """Whether the exit time can be finite: 1 - eps^2 >= inf |overlap|^2.

    ``finite=False`` is a proof that the state never exits (the trajectory
    lies on the phase torus).  ``finite=True`` is only a proof when the
    eigenvalues are rationally independent.
    """
    _check_eps(eps)
    m = torus_infimum(state.probabilities)
    thr = 1.0 - eps * eps
    return Finiteness(thr >= m, m, thr)


@dataclass
class BoundReport:
    eps: float
    d: int
    moments: MomentSummary
    mt_lower: Optional[float]
    thm2_upper: Optional[float]
    thm1_rec_upper: Optional[Bound] = None
    kth_rec_upper: Optional[Bound] = None
    concrete_rec_upper: Optional[Bound] = None
    reduced_rec_upper: Optional[Bound] = None
    reduced_rec_improved: Optional[Bound] = None
    free_rec_upper: Optional[Bound] = None
    unitary_exit_upper: Optional[float] = None
    unitary_rec_upper: Optional[Bound] = None
    finite: Optional[Finiteness] = None
    notes: dict = field(default_factory=dict)

    def rows(self) -> list[tuple[str, object]]:
        """(name, value) pairs in display order; Bound values stay as Bound."""
        out = [
            ("eps", self.eps),
            ("d", self.d),
            ("eps_star", self.moments.eps_star),
            ("mt_lower", self.mt_lower),
            ("thm2_upper", self.thm2_upper),
            ("thm1_rec_upper", self.thm1_rec_upper),
            ("kth_rec_upper", self.kth_rec_upper),
            ("concrete_rec_upper", self.concrete_rec_upper),
            ("reduced_rec_upper", self.reduced_rec_upper),
            ("reduced_rec_improved", self.reduced_rec_improved),
            ("free_rec_upper", self.free_rec_upper),
            ("unitary_exit_upper", self.unitary_exit_upper),
            ("unitary_rec_upper", self.unitary_rec_upper),
        ]
        if self.finite is not None:
            out += [
                ("finite_exit", self.finite.finite),
                ("finite_infimum", self.finite.infimum),
                ("finite_threshold", self.finite.threshold),
            ]
        return out

    def to_json(self) -> dict:
        out = {}
        for name, v in self.rows():
            if isinstance(v, Bound):
                out[name] = v.to_json()
                out[name + "_log10"] = v.log10
            else:
                out[name] = v
        if self.finite is not None:
            out["finite_caveat"] = self.finite.caveat
        out["notes"] = dict(self.notes)
        return out


def bound_report(
    state: SpectralState,
    eps: float,
    t_exit: Optional[float] = None,
    t_exit_2eps: Optional[float] = None,
    k: Optional[int] = None,
    n_particles: Optional[int] = None,
) -> BoundReport:
    """Evaluate every applicable bound for one (state, eps) instance.

    ``t_exit`` defaults to the analytic upper bound when that exists; the
    report notes which exit time fed the recurrence bounds.
    """
    from .structure import effective_support  # local: structure imports spectral only

    m = moments(state)
    d = state.dim
    rep = BoundReport(eps, d, m, None, None, finite=finiteness(state, eps))
    if m.variance > 0:
        rep.mt_lower, rep.thm2_upper = qsl_bounds(eps, m)
    else:
        rep.notes["variance"] = "zero variance: state is stationary"
    if t_exit is None and rep.thm2_upper is not None:
        t_exit = rep.thm2_upper
        rep.notes["t_exit_source"] = "analytic upper bound"
    elif t_exit is not None:
        rep.notes["t_exit_source"] = "supplied"
    if d >= 2 and t_exit is not None and t_exit > 0:
        rb = recurrence_bounds(eps, d, t_exit, t_exit_2eps, k, m)
        rep.thm1_rec_upper, rep.kth_rec_upper = rb.thm1, rb.kth
        rep.notes.update(rb.errors)
        q = effective_support(state, eps * eps / 4).size
        h = effective_support(state, eps / 2).size
        rep.reduced_rec_upper, rep.reduced_rec_improved = reduced_bound(eps, t_exit, q, h)
        if n_particles is not None:
            rep.free_rec_upper = free_bound(eps, t_exit, d, n_particles)
    if d >= 2 and m.variance > 0:
        rep.concrete_rec_upper = concrete_recurrence_bound(eps, d, m)
        if rep.concrete_rec_upper is None:
            rep.notes["concrete"] = f"needs eps < eps*/2 = {m.eps_star / 2:.6g}"
    lam = state.eigenvalues
    if lam.max() > lam.min():
        rep.unitary_exit_upper, rep.unitary_rec_upper = unitary_bounds(eps, float(lam.max()), float(lam.min()), d)
    return rep
