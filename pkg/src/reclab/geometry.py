"""Explicit phase nets on the state torus and on diagonal unitary families.

A net pins the first phase to 0 and puts each remaining phase on a uniform
grid of ``n`` points.  States use ``n = ceil(2 pi / eps)`` and give an
eps-covering in trace distance; diagonal unitaries use ``n = ceil(4 pi / eps)``
and give an eps/2-covering in the global-phase-minimized operator norm.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .spectral import SpectralState

ENUMERATION_CAP = 10**7
TWO_PI = 2.0 * math.pi


class Flavor(str, Enum):
    STATE = "state"
    UNITARY = "unitary"


class NetTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class PhaseNet:
    epsilon: float
    d: int
    n: int
    flavor: Flavor
    base: Optional[SpectralState] = None
    pinned: frozenset = frozenset()

    @property
    def free_coords(self) -> list[int]:
        return [k for k in range(1, self.d) if k not in self.pinned]

    @property
    def log10_size(self) -> float:
        return len(self.free_coords) * math.log10(self.n)

    @property
    def size(self) -> int:
        return self.n ** len(self.free_coords)

    @property
    def scale(self) -> float:
        """Covering radius guaranteed for this flavor."""
        return self.epsilon if self.flavor is Flavor.STATE else self.epsilon / 2

    @property
    def size_bound_log10(self) -> float:
        c = 4 * math.pi if self.flavor is Flavor.STATE else 8 * math.pi
        return (self.d - 1) * math.log10(c / self.epsilon)

    def points(self, cap: int = ENUMERATION_CAP):
        """Iterate over net phase vectors (first coordinate 0)."""
        if self.size > cap:
            raise NetTooLarge(f"net has {self.size} points, cap is {cap}")
        grid = TWO_PI * np.arange(self.n) / self.n
        free = self.free_coords
        for combo in itertools.product(grid, repeat=len(free)):
            phi = np.zeros(self.d)
            phi[free] = combo
            yield phi

    def nearest(self, phases: np.ndarray) -> np.ndarray:
        """Net point closest, coordinate by coordinate, to each row of ``phases``.

        Each coordinate k >= 1 is the grid point nearest to phi_k - phi_0 on
        the circle; pinned coordinates map to 0.
        """
        phases = np.atleast_2d(np.asarray(phases, dtype=float))
        rel = np.mod(phases - phases[:, :1], TWO_PI)
        h = TWO_PI / self.n
        out = np.mod(np.rint(rel / h), self.n) * h
        out[:, 0] = 0.0
        if self.pinned:
            out[:, sorted(self.pinned)] = 0.0
        return out


def net_resolution(eps: float, flavor: Flavor) -> int:
    c = 2 * math.pi if flavor is Flavor.STATE else 4 * math.pi
    return math.ceil(c / eps)


def build_phase_net(eps: float, d: int, flavor=Flavor.STATE, base: Optional[SpectralState] = None,
                    pinned: Sequence[int] = (), resolution_eps: Optional[float] = None) -> PhaseNet:
    """Construct the explicit net.

    ``pinned`` lists coordinates that get a single grid point (phase 0);
    this is the low-mass construction where coordinates carrying little
    probability need no resolution.  ``resolution_eps`` overrides the scale
    used for the grid (e.g. eps/2 for an eps/2-covering).
    """
    flavor = Flavor(flavor)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    if d < 1:
        raise ValueError("d must be >= 1")
    if flavor is Flavor.STATE and base is not None and base.dim != d:
        raise ValueError("base state dimension does not match d")
    if any(not 0 <= k < d for k in pinned):
        raise ValueError("pinned coordinate out of range")
    n = net_resolution(resolution_eps or eps, flavor)
    return PhaseNet(eps, d, n, flavor, base, frozenset(int(k) for k in pinned if k != 0))


def torus_distance(weights: np.ndarray, phases: np.ndarray, net_phases: np.ndarray) -> np.ndarray:
    """Trace distance between torus states with phases ``phases`` and ``net_phases``.

    ``weights`` are the probabilities |a_k|^2 of the base state.
    """
    ov = np.exp(1j * (net_phases - phases)) @ weights
    return np.sqrt(np.clip(1.0 - np.abs(ov) ** 2, 0.0, 1.0))


def diagonal_diamond_distance(theta, theta_prime) -> float:
    """min over global phase of max_k |e^{i theta_k} - e^{i (theta'_k + phi)}|.

    With delta_k = theta_k - theta'_k sorted on the circle and g the largest
    gap between neighbours, the optimal phase sits mid-way along the
    complementary arc of length 2 pi - g, giving 2 sin((2 pi - g) / 4).
    """
    delta = np.mod(np.asarray(theta, dtype=float) - np.asarray(theta_prime, dtype=float), TWO_PI)
    if delta.size == 0:
        raise ValueError("empty phase vectors")
    return float(_minimax_chord(delta[None, :])[0])


def _minimax_chord(delta: np.ndarray) -> np.ndarray:
    """Row-wise circular minimax chord length for phases already reduced mod 2 pi."""
    s = np.sort(delta, axis=1)
    gaps = np.diff(s, axis=1)
    wrap = TWO_PI - (s[:, -1] - s[:, 0])
    g = np.maximum(gaps.max(axis=1, initial=0.0), wrap)
    return 2.0 * np.sin(np.clip(TWO_PI - g, 0.0, TWO_PI) / 4.0)


def diamond_distance_grid(theta, theta_prime, points: int = 100_000) -> float:
    """Brute-force version of :func:`diagonal_diamond_distance` over a phi grid."""
    delta = np.asarray(theta, dtype=float) - np.asarray(theta_prime, dtype=float)
    best = math.inf
    for chunk in np.array_split(TWO_PI * np.arange(points) / points, max(1, points // 10_000)):
        vals = np.abs(np.exp(1j * delta)[None, :] - np.exp(1j * chunk)[:, None]).max(axis=1)
        best = min(best, float(vals.min()))
    return best


@dataclass(frozen=True)
class CoverResult:
    max_distance: float
    scale: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.max_distance <= self.scale

    def to_json(self) -> dict:
        return {"max_distance": self.max_distance, "pass": self.passed, "samples": self.samples}


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("RECLAB_THREADS", "1")))
    except ValueError:
        return 1


def covering_check(net: PhaseNet, samples: int, seed: int = 0, chunk: int = 20_000) -> CoverResult:
    """Largest distance from ``samples`` uniform random torus points to the net.

    Chunks draw from independent streams spawned from ``seed``, so the
    result does not depend on worker count.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    d = net.d
    if net.flavor is Flavor.STATE:
        weights = net.base.probabilities if net.base is not None else np.full(d, 1.0 / d)
    sizes = [min(chunk, samples - i) for i in range(0, samples, chunk)]
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(args):
        size, ss = args
        rng = np.random.default_rng(ss)
        phi = rng.uniform(0.0, TWO_PI, size=(size, d))
        nearest = net.nearest(phi)
        if net.flavor is Flavor.STATE:
            dist = torus_distance(weights, phi, nearest)
        else:
            dist = _minimax_chord(np.mod(phi - nearest, TWO_PI))
        return float(dist.max())

    jobs = list(zip(sizes, streams))
    workers = _workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            maxima = list(ex.map(run, jobs))
    else:
        maxima = [run(j) for j in jobs]
    return CoverResult(max(maxima), net.scale, samples)


def projective_distance(u: np.ndarray, v: np.ndarray) -> float:
    """inf over phi of ||u - e^{i phi} v||_2, i.e. sqrt(2 - 2|<u, v>|) for unit vectors."""
    return math.sqrt(max(0.0, 2.0 - 2.0 * abs(np.vdot(u, v))))


def trace_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Trace distance of pure states, from the eigenvalues of the difference of projectors."""
    rho = np.outer(u, u.conj()) - np.outer(v, v.conj())
    return 0.5 * float(np.abs(np.linalg.eigvalsh(rho)).sum())
