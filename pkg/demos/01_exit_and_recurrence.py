# Exit and recurrence for a few small systems, next to the closed-form bounds.
import math

import numpy as np

from reclab import CrossingQuery, bound_report, find_exit, find_recurrences, moments, validate_state

# spin-1/2 in a field: D(t) = |sin t|, so everything is known in closed form
qubit = validate_state([-1.0, 1.0], [1 / math.sqrt(2)] * 2)
eps = 0.1

cert = find_recurrences(qubit, CrossingQuery(eps, k=3))
print("t_exit      ", cert.t_exit, " closed form", math.asin(eps))
print("recurrences ", cert.recurrences)
print("closed form ", [j * math.pi - math.asin(eps) for j in (1, 2, 3)])
print("miss_tol    ", cert.miss_tol, " (deepest crossing the march could have stepped over)")

rep = bound_report(qubit, eps, t_exit=cert.t_exit, k=3, t_exit_2eps=find_exit(qubit, CrossingQuery(2 * eps)).t_exit)
for name, value in rep.rows():
    print(f"  {name:22s} {getattr(value, 'value', value)}")

# a generic 5-level system: the speed-limit sandwich holds, the recurrence bound is enormous
rng = np.random.default_rng(1)
lam = rng.uniform(-1, 1, 5)
w = rng.exponential(size=5)
state = validate_state(lam, np.sqrt(w / w.sum()))
m = moments(state)
eps = 0.4 * m.eps_star
c = find_recurrences(state, CrossingQuery(eps, t_max=1e5))
rep = bound_report(state, eps, t_exit=c.t_exit)
print("\n5 levels, eps =", round(eps, 4))
print("  mt_lower <= t_exit <= thm2_upper:", rep.mt_lower, c.t_exit, rep.thm2_upper)
print("  first recurrence", c.recurrences[:1], "bound", rep.thm1_rec_upper.value)
