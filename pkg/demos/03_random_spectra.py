# Random Hamiltonians: where typical states sit and how recurrence grows with d.
import numpy as np

from reclab.ensembles import EnsembleConfig, dimension_sweep, proximity_probability, run_ensemble

s = run_ensemble(EnsembleConfig(d=2000, epsilon=0.05, trials=50, seed=0, k_rec=0, check_monotone=False))
print("d=2000: moment windows", s.window_fraction, "exit window", s.exit_window_fraction)
print("t_exit quantiles", s.t_exit_quantiles)

summaries, fit = dimension_sweep(range(2, 7), 0.3, 100, seed=0, rec_horizon=1e6)
for d, med in zip(fit.dims, fit.medians):
    print(f"d={d}: median t_rec = {np.exp(med):10.1f}")
print("slope of median log t_rec per level:", round(fit.slope, 3), "95% CI", np.round(fit.ci, 3))

# the probability bound is far from sharp at small d, but the decay with d shows up
for d in (2, 4, 8):
    p = proximity_probability(d, 0.3, 2.0, 200_000, seed=0)
    print(f"d={d}: P(D < 0.3 at t=2) ~ {p.estimate:.4f}, bound 10^{p.bound.log10:.1f}")
