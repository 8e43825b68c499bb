"""Pure states written in the eigenbasis of a Hamiltonian.

A state is the pair (eigenvalues, amplitudes); with hbar = 1 the evolved
vector is ``sum_k a_k exp(-i lambda_k t) |k>``.  Everything that follows
(fidelity, moments, the double commutator) only needs those two arrays.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

NORM_BAND = 1e-6
DENSE_LIMIT = 512


class StateError(ValueError):
    """Raised for malformed or unnormalizable state input."""


@dataclass(frozen=True, eq=False)
class SpectralState:
    eigenvalues: np.ndarray
    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def shifted(self, c: float) -> "SpectralState":
        """Same state under H + c*I."""
        return SpectralState(self.eigenvalues + c, self.amplitudes)

    def to_json(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "amplitudes": [[float(z.real), float(z.imag)] for z in self.amplitudes],
        }


def validate_state(eigenvalues, amplitudes) -> SpectralState:
    """Check and normalize raw eigenvalue / amplitude input.

    Amplitudes whose squared norm lies within ``NORM_BAND`` of one are
    rescaled (relative phases kept); anything further off is rejected as
    corrupt input.
    """
    lam = np.asarray(eigenvalues, dtype=float).ravel()
    amp = np.asarray(amplitudes, dtype=complex).ravel()
    if lam.size == 0:
        raise StateError("empty state")
    if lam.size != amp.size:
        raise StateError(f"length mismatch: {lam.size} eigenvalues, {amp.size} amplitudes")
    if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(amp))):
        raise StateError("non-finite entry")
    norm2 = float(np.sum(np.abs(amp) ** 2))
    if abs(norm2 - 1.0) > NORM_BAND:
        raise StateError(f"squared norm {norm2!r} outside [1-{NORM_BAND}, 1+{NORM_BAND}]")
    amp = amp / math.sqrt(norm2)
    lam.setflags(write=False)
    amp.setflags(write=False)
    return SpectralState(lam, amp)


def from_probabilities(eigenvalues, probabilities) -> SpectralState:
    """State with real non-negative amplitudes sqrt(p_k)."""
    p = np.asarray(probabilities, dtype=float)
    if np.any(p < 0):
        raise StateError("negative probability")
    return validate_state(eigenvalues, np.sqrt(p))


def load_state(path) -> SpectralState:
    """Read a state from JSON or CSV (columns lambda,re,im)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StateError(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".csv":
        rows = list(csv.DictReader(text.splitlines()))
        try:
            lam = [float(r["lambda"]) for r in rows]
            amp = [complex(float(r["re"]), float(r["im"])) for r in rows]
        except (KeyError, ValueError) as exc:
            raise StateError(f"bad CSV state file {path}: {exc}") from exc
        return validate_state(lam, amp)
    try:
        obj = json.loads(text)
        lam = obj["eigenvalues"]
        amp = [complex(z[0], z[1]) if isinstance(z, list) else complex(z) for z in obj["amplitudes"]]
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise StateError(f"bad JSON state file {path}: {exc}") from exc
    return validate_state(lam, amp)


def save_state(state: SpectralState, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "re", "im"])
            for lam, z in zip(state.eigenvalues, state.amplitudes):
                w.writerow([repr(float(lam)), repr(float(z.real)), repr(float(z.imag))])
    else:
        path.write_text(json.dumps(state.to_json(), indent=2) + "\n")


class Propagator:
    """Fast repeated evaluation of the survival amplitude of one state.

    Eigenvalues are centred on the mean energy so that ``1 - F`` can be
    formed without cancellation at small times.
    """

    __slots__ = ("p", "lam", "mean")

    def __init__(self, state: SpectralState):
        p = state.probabilities
        keep = p > 0
        self.p = p[keep]
        self.mean = float(np.dot(p, state.eigenvalues))
        self.lam = state.eigenvalues[keep] - self.mean

    def infidelity(self, t: float) -> float:
        """1 - F(t), computed as s(2 - s) - im^2 with s = 2 sum p sin^2(lam t / 2)."""
        x = self.lam * t
        s = 2.0 * np.dot(self.p, np.sin(0.5 * x) ** 2)
        im = np.dot(self.p, np.sin(x))
        return min(1.0, max(0.0, float(s * (2.0 - s) - im * im)))

    def distance(self, t: float) -> float:
        return math.sqrt(self.infidelity(t))

    def distances(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        x = np.multiply.outer(ts, self.lam)
        s = 2.0 * (np.sin(0.5 * x) ** 2) @ self.p
        im = np.sin(x) @ self.p
        return np.sqrt(np.clip(s * (2.0 - s) - im * im, 0.0, 1.0))


def survival(state: SpectralState, t: float) -> tuple[float, float]:
    """Survival fidelity F = |<psi_0|psi_t>|^2 and trace distance sqrt(1 - F)."""
    q = Propagator(state).infidelity(float(t))
    return 1.0 - q, math.sqrt(q)


def overlap(state: SpectralState, t) -> np.ndarray:
    """Raw survival amplitude sum_k p_k exp(-i lambda_k t), by direct summation."""
    t = np.asarray(t, dtype=float)
    return np.exp(-1j * np.multiply.outer(t, state.eigenvalues)) @ state.probabilities


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    second_moment: float
    variance: float
    fourth_central: float
    eps_star: float
    lipschitz: float

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "second_moment": self.second_moment,
            "variance": self.variance,
            "fourth_central": self.fourth_central,
            "eps_star": self.eps_star,
            "lipschitz": self.lipschitz,
        }


def moments(state: SpectralState) -> MomentSummary:
    """Energy moments of the state and the derived threshold eps*.

    Zero-variance states get ``eps_star = 0`` by convention.  eps* is
    scale-free, so it is formed from the spectrum rescaled to unit spread,
    which keeps it right when the fourth moment under- or overflows.
    """
    p = state.probabilities
    lam = state.eigenvalues
    mean = float(np.dot(p, lam))
    second = float(np.dot(p, lam * lam))
    support = lam[p > 0]
    if support.size == 0 or np.all(support == support[0]):
        var = mu4 = 0.0
    else:
        c = lam - mean
        c2 = c * c
        var = float(np.dot(p, c2))
        mu4 = float(np.dot(p, c2 * c2))
    eps_star = 0.0
    if var > 0:
        u = c / np.max(np.abs(c[p > 0]))
        u2 = u * u
        v = float(np.dot(p, u2))
        eps_star = v / (v + math.sqrt(float(np.dot(p, u2 * u2))))
    return MomentSummary(mean, second, var, mu4, eps_star, math.sqrt(var))


def commutator_operator(state: SpectralState, dense_limit: int = DENSE_LIMIT):
    """Double commutator X_H = -[H, [H, psi_0]] as a dense matrix.

    Returns ``(X, norm, trace)`` where ``norm`` is the spectral norm from a
    Hermitian eigendecomposition and ``trace = tr(X psi_0)``, which equals
    ``-2 * variance``.
    """
    d = state.dim
    if d > dense_limit:
        raise StateError(f"dimension {d} above dense limit {dense_limit}")
    a = np.asarray(state.amplitudes)
    rho = np.outer(a, a.conj())
    lam = state.eigenvalues
    # [H, [H, rho]]_{jk} = (lam_j - lam_k)^2 rho_{jk}
    gap = lam[:, None] - lam[None, :]
    x = -(gap * gap) * rho
    evals = np.linalg.eigvalsh(0.5 * (x + x.conj().T))
    norm = float(np.max(np.abs(evals)))
    trace = float(np.real(np.trace(x @ rho)))
    return x, norm, trace
