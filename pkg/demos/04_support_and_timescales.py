# Effective support versus effective dimension, and the two-timescale qutrit.
import math

import numpy as np

from reclab.ensembles import EnsembleConfig, draw_state
from reclab.scenarios import qutrit_sweep
from reclab.spectral import Propagator, from_probabilities
from reclab.structure import effective_dimension, effective_support, reduce_state

s = draw_state(EnsembleConfig(d=101, epsilon=0.3, eta=0.1), 0)
print("eta state: d_eff", round(effective_dimension(s), 4), "d_supp", effective_support(s, 0.3**2 / 4).size)

# dropping a weight-delta level can cost more than sqrt(2 delta) in distance
delta = 0.05
two = from_probabilities([0.0, 1.0], [1 - delta, delta])
print("two levels: max D", Propagator(two).distance(math.pi), "sqrt(2 delta)", math.sqrt(2 * delta),
      "2 sqrt(delta)", 2 * math.sqrt(delta))

reports, monotone = qutrit_sweep(0.1, (1e2, 1e3, 1e4))
for r in reports:
    print(f"ratio {r.ratio:>7g}: t_exit {r.certificate.t_exit:.3e}, {len(r.recurrences)} returns, "
          f"longest gap {r.max_gap:.3f} = {r.gap_ratio:.0f} t_exit")
print("gap ratio increasing:", monotone)
