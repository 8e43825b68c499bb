"""Monte Carlo over random diagonal Hamiltonians.

Eigenvalues are i.i.d. Uniform[-1, 1].  The initial state is either the
uniform superposition or the eta-state (one eigenvector with weight eta at
a random position, the rest sharing 1 - eta equally).  Each trial draws
from a Philox stream keyed by (seed, trial_id), so a trial is reproducible
on its own and results do not depend on execution order.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .bounds import Bound, first_recurrence_bound, qsl_bounds
from .spectral import MomentSummary, Propagator, SpectralState, moments, validate_state
from .structure import effective_dimension, effective_support
from .timing import CrossingQuery, Status, find_exit, find_recurrences

# population values for Uniform[-1, 1]: E<H> = 0, E<H^2> = 1/3, E<H^4> = 1/5
MEAN_WINDOW = 0.1
SECOND_WINDOW = (0.2, 0.5)
VARIANCE_WINDOW = (0.1, 0.5)
FOURTH_WINDOW = (0.2, 0.1)  # centre, half-width
EXIT_WINDOW = (math.sqrt(2.0), 2.0 * math.sqrt(5.0))
PROBE_T = math.sqrt(2.0) / 9.0
PROXIMITY_C = 50.0 * (1.0 + 72.0 / math.sqrt(2.0))


@dataclass(frozen=True)
class EnsembleConfig:
    d: int
    epsilon: float
    trials: int = 100
    seed: int = 0
    eta: Optional[float] = None
    t_probe: Optional[float] = None
    rec_horizon: Optional[float] = None
    k_rec: int = 1
    check_monotone: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.eta is not None and not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def family(self) -> str:
        return "uniform" if self.eta is None else f"eta:{self.eta:g}"


def trial_rng(seed: int, trial_id: int) -> np.random.Generator:
    key = np.array([seed, trial_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def draw_state(config: EnsembleConfig, trial_id: int) -> SpectralState:
    rng = trial_rng(config.seed, trial_id)
    d = config.d
    lam = rng.uniform(-1.0, 1.0, size=d)
    if config.eta is None or d == 1:
        p = np.full(d, 1.0 / d)
    else:
        p = np.full(d, (1.0 - config.eta) / (d - 1))
        p[rng.integers(d)] = config.eta
    return validate_state(lam, np.sqrt(p))


@dataclass
class TrialRecord:
    trial_id: int
    seed: int
    d: int
    moments: MomentSummary
    windows: dict
    t_exit: Optional[float]
    exit_status: str
    mt_lower: Optional[float]
    thm2_upper: Optional[float]
    t_rec: Optional[float]
    rec_horizon: Optional[float]
    rec_censored: bool
    monotone_ok: Optional[bool]
    d_eff: float
    d_supp: int
    probe_distance: Optional[float] = None
    evaluations: int = 0

    @property
    def windows_ok(self) -> bool:
        return all(v for k, v in self.windows.items() if k != "exit")

    @property
    def sandwich_ok(self) -> Optional[bool]:
        if self.t_exit is None or self.thm2_upper is None:
            return None
        return self.mt_lower <= self.t_exit <= self.thm2_upper

    def row(self) -> dict:
        out = {
            "trial_id": self.trial_id,
            "seed": self.seed,
            "d": self.d,
            **{f"m_{k}": v for k, v in self.moments.to_json().items()},
            **{f"w_{k}": v for k, v in self.windows.items()},
            "t_exit": self.t_exit,
            "exit_status": self.exit_status,
            "mt_lower": self.mt_lower,
            "thm2_upper": self.thm2_upper,
            "t_rec": self.t_rec,
            "rec_horizon": self.rec_horizon,
            "rec_censored": self.rec_censored,
            "monotone_ok": self.monotone_ok,
            "d_eff": self.d_eff,
            "d_supp": self.d_supp,
            "probe_distance": self.probe_distance,
            "evaluations": self.evaluations,
        }
        return out


def _windows(state: SpectralState, m: MomentSummary, eps: float, t_exit: Optional[float]) -> dict:
    p, lam = state.probabilities, state.eigenvalues
    h4 = float(np.dot(p, lam**4))
    lo, hi = EXIT_WINDOW
    return {
        "mean": abs(m.mean) < MEAN_WINDOW,
        "second": SECOND_WINDOW[0] < m.second_moment < SECOND_WINDOW[1],
        "variance": VARIANCE_WINDOW[0] < m.variance < VARIANCE_WINDOW[1],
        "fourth": abs(h4 - FOURTH_WINDOW[0]) < FOURTH_WINDOW[1],
        "exit": t_exit is not None and lo * eps < t_exit < hi * eps,
    }


def _monotone(state: SpectralState, m: MomentSummary, eps: float, points: int = 1000) -> Optional[bool]:
    """D non-decreasing on a grid over [0, t_exit(eps*)], when eps < eps*."""
    if not 0.0 < eps < m.eps_star < 1.0:
        return None
    cert = find_exit(state, CrossingQuery(m.eps_star))
    if cert.t_exit is None:
        return None
    ts = np.linspace(0.0, cert.t_exit, points)
    dist = Propagator(state).distances(ts)
    return bool(np.all(np.diff(dist) >= -1e-12))


def sample_trial(config: EnsembleConfig, trial_id: int) -> TrialRecord:
    state = draw_state(config, trial_id)
    eps = config.epsilon
    m = moments(state)
    d = state.dim
    mt = thm2 = None
    if m.variance > 0:
        mt, thm2 = qsl_bounds(eps, m)

    t_rec = horizon = None
    censored = False
    evals = 0
    cert = find_exit(state, CrossingQuery(eps))
    evals += cert.evaluations
    if cert.status is Status.EXITED and config.k_rec > 0 and d >= 2:
        horizon = min(
            first_recurrence_bound(eps, d, cert.t_exit).value,
            1e8 / m.lipschitz,
            config.rec_horizon if config.rec_horizon is not None else math.inf,
        )
        rc = find_recurrences(state, CrossingQuery(eps, t_max=horizon, k=config.k_rec))
        evals += rc.evaluations
        if len(rc.recurrences) >= config.k_rec:
            t_rec = rc.recurrences[config.k_rec - 1]
        else:
            censored = True

    probe = None
    if config.t_probe is not None:
        probe = Propagator(state).distance(config.t_probe)

    return TrialRecord(
        trial_id=trial_id,
        seed=config.seed,
        d=d,
        moments=m,
        windows=_windows(state, m, eps, cert.t_exit),
        t_exit=cert.t_exit,
        exit_status=cert.status.value,
        mt_lower=mt,
        thm2_upper=thm2,
        t_rec=t_rec,
        rec_horizon=horizon,
        rec_censored=censored,
        monotone_ok=_monotone(state, m, eps) if config.check_monotone else None,
        d_eff=effective_dimension(state),
        d_supp=effective_support(state, eps * eps / 4).size,
        probe_distance=probe,
        evaluations=evals,
    )


def _workers(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, workers)
    try:
        return max(1, int(os.environ.get("RECLAB_THREADS", "1")))
    except ValueError:
        return 1


def _run_one(args):
    config, trial_id = args
    return sample_trial(config, trial_id)


def run_trials(config: EnsembleConfig, workers: Optional[int] = None) -> list[TrialRecord]:
    jobs = [(config, i) for i in range(config.trials)]
    n = _workers(workers)
    if n > 1 and config.trials > 1:
        with ProcessPoolExecutor(n) as ex:
            records = list(ex.map(_run_one, jobs, chunksize=max(1, config.trials // (4 * n))))
    else:
        records = [_run_one(j) for j in jobs]
    return sorted(records, key=lambda r: r.trial_id)


def rec_times(records: Sequence[TrialRecord]) -> np.ndarray:
    """Recurrence times with censored trials replaced by their horizon (a lower bound)."""
    vals = []
    for r in records:
        if r.t_rec is not None:
            vals.append(r.t_rec)
        elif r.rec_censored and r.rec_horizon is not None:
            vals.append(r.rec_horizon)
    return np.asarray(vals, dtype=float)


@dataclass
class EnsembleSummary:
    config: EnsembleConfig
    records: list
    window_fraction: float
    exit_window_fraction: float
    joint_fraction: float
    sandwich_violations: int
    monotone_fraction: Optional[float]
    t_exit_quantiles: dict
    t_rec_quantiles: dict
    censored: int

    def to_json(self) -> dict:
        return {
            "config": {**asdict(self.config), "family": self.config.family},
            "trials": len(self.records),
            "window_fraction": self.window_fraction,
            "exit_window": [EXIT_WINDOW[0] * self.config.epsilon, EXIT_WINDOW[1] * self.config.epsilon],
            "exit_window_fraction": self.exit_window_fraction,
            "joint_fraction": self.joint_fraction,
            "sandwich_violations": self.sandwich_violations,
            "monotone_fraction": self.monotone_fraction,
            "t_exit_quantiles": self.t_exit_quantiles,
            "t_rec_quantiles": self.t_rec_quantiles,
            "censored": self.censored,
        }


QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


def _quantiles(x: np.ndarray) -> dict:
    if x.size == 0:
        return {}
    return {f"q{int(q * 100):02d}": float(np.quantile(x, q)) for q in QUANTILES}


def summarize(config: EnsembleConfig, records: Sequence[TrialRecord]) -> EnsembleSummary:
    records = sorted(records, key=lambda r: r.trial_id)
    n = len(records)
    win = [r.windows_ok for r in records]
    ex = [r.windows["exit"] for r in records]
    mono = [r.monotone_ok for r in records if r.monotone_ok is not None]
    t_exit = np.array([r.t_exit for r in records if r.t_exit is not None])
    return EnsembleSummary(
        config=config,
        records=list(records),
        window_fraction=sum(win) / n,
        exit_window_fraction=sum(ex) / n,
        joint_fraction=sum(a and b for a, b in zip(win, ex)) / n,
        sandwich_violations=sum(r.sandwich_ok is False for r in records),
        monotone_fraction=(sum(mono) / len(mono)) if mono else None,
        t_exit_quantiles=_quantiles(t_exit),
        t_rec_quantiles=_quantiles(rec_times(records)),
        censored=sum(r.rec_censored for r in records),
    )


def run_ensemble(config: EnsembleConfig, workers: Optional[int] = None) -> EnsembleSummary:
    return summarize(config, run_trials(config, workers))


@dataclass
class ScalingFit:
    dims: list
    medians: list
    slope: float
    ci: tuple
    censored: dict = field(default_factory=dict)

    @property
    def positive(self) -> bool:
        return self.ci[0] > 0

    def to_json(self) -> dict:
        return {
            "dims": self.dims,
            "median_log_t_rec": self.medians,
            "slope": self.slope,
            "ci95": list(self.ci),
            "positive": self.positive,
            "censored": self.censored,
        }


def scaling_fit(by_dim: dict, n_boot: int = 2000, seed: int = 0) -> ScalingFit:
    """Least-squares slope of median log t_rec against d, with a percentile bootstrap CI.

    ``by_dim`` maps d to a sequence of TrialRecords (or raw recurrence times).
    Censored trials enter at their horizon, which can only bias the slope
    down when censoring grows with d.
    """
    dims = sorted(by_dim)
    records = {d: len(by_dim[d]) > 0 and isinstance(by_dim[d][0], TrialRecord) for d in dims}
    samples = []
    for d in dims:
        v = by_dim[d]
        x = rec_times(v) if records[d] else np.asarray(v, dtype=float)
        if x.size == 0:
            raise ValueError(f"no recurrence times for d = {d}")
        samples.append(np.log(x))
    dvec = np.asarray(dims, dtype=float)
    med = np.array([np.median(s) for s in samples])
    slope = float(np.polyfit(dvec, med, 1)[0])
    rng = np.random.default_rng(seed)
    boot = np.empty(n_boot)
    for b in range(n_boot):
        mb = [np.median(s[rng.integers(0, s.size, s.size)]) for s in samples]
        boot[b] = np.polyfit(dvec, mb, 1)[0]
    lo, hi = np.quantile(boot, [0.025, 0.975])
    censored = {}
    for d in dims:
        if records[d]:
            censored[d] = sum(r.rec_censored for r in by_dim[d])
    return ScalingFit(dims, med.tolist(), slope, (float(lo), float(hi)), censored)


def dimension_sweep(dims: Sequence[int], epsilon: float, trials: int, seed: int = 0,
                    rec_horizon: Optional[float] = None, workers: Optional[int] = None):
    """Run one ensemble per dimension and fit the recurrence scaling."""
    by_dim = {}
    summaries = {}
    for d in dims:
        cfg = EnsembleConfig(d=d, epsilon=epsilon, trials=trials, seed=seed,
                             rec_horizon=rec_horizon, check_monotone=False)
        summaries[d] = run_ensemble(cfg, workers)
        by_dim[d] = summaries[d].records
    return summaries, scaling_fit(by_dim, seed=seed)


@dataclass(frozen=True)
class ProximityEstimate:
    estimate: float
    ci: tuple
    hits: int
    trials: int
    bound: Bound

    @property
    def vacuous(self) -> bool:
        return self.bound.log10 >= 0.0

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "ci95": list(self.ci),
            "hits": self.hits,
            "trials": self.trials,
            "bound": self.bound.to_json(),
            "bound_log10": self.bound.log10,
            "vacuous": self.vacuous,
        }


def proximity_bound(d: int, eps: float) -> Bound:
    """(8 pi / eps^2) (C eps)^d with C = 50 (1 + 72 / sqrt 2)."""
    return Bound.of(8 * math.pi / eps**2, PROXIMITY_C * eps, d)


def proximity_probability(d: int, eps: float, t: float, trials: int, seed: int = 0,
                          chunk: int = 50_000) -> ProximityEstimate:
    """Monte Carlo estimate of P(D(psi_0, psi_t) < eps) over random spectra, uniform state."""
    if not t > PROBE_T:
        raise ValueError(f"probe time must exceed sqrt(2)/9 = {PROBE_T:.6f}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([seed, d]))
    hits = 0
    left = trials
    while left > 0:
        n = min(chunk, left)
        lam = rng.uniform(-1.0, 1.0, size=(n, d))
        ov = np.exp(-1j * lam * t).mean(axis=1)
        dist = np.sqrt(np.clip(1.0 - np.abs(ov) ** 2, 0.0, 1.0))
        hits += int(np.count_nonzero(dist < eps))
        left -= n
    ci = stats.binomtest(hits, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return ProximityEstimate(hits / trials, (float(ci.low), float(ci.high)), hits, trials,
                             proximity_bound(d, eps))
