"""Exit and Poincare recurrence times for pure states under a Hamiltonian."""
from .bounds import Bound, BoundReport, bound_report, finiteness
from .spectral import (MomentSummary, SpectralState, commutator_operator, from_probabilities, load_state,
                       moments, save_state, survival, validate_state)
from .structure import SupportSet, effective_dimension, effective_support, reduce_state
from .timing import CrossingQuery, Status, TimingCertificate, find_exit, find_recurrences

__all__ = [
    "Bound", "BoundReport", "bound_report", "finiteness",
    "MomentSummary", "SpectralState", "commutator_operator", "from_probabilities", "load_state",
    "moments", "save_state", "survival", "validate_state",
    "SupportSet", "effective_dimension", "effective_support", "reduce_state",
    "CrossingQuery", "Status", "TimingCertificate", "find_exit", "find_recurrences",
]
