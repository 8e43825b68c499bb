# Phase nets on the torus and the diamond distance of commuting unitaries.
import math

import numpy as np

from reclab.geometry import (Flavor, build_phase_net, covering_check, diagonal_diamond_distance,
                             diamond_distance_grid)

for d, eps in [(2, 0.5), (3, 0.5), (3, 0.3), (4, 0.5)]:
    net = build_phase_net(eps, d)
    res = covering_check(net, 100_000, seed=0)
    print(f"d={d} eps={eps}: {net.size:>6d} points, worst sampled distance {res.max_distance:.4f}")

# unitaries need twice the resolution for half the radius
net = build_phase_net(0.5, 3, Flavor.UNITARY)
print("unitary net", net.size, "points, worst", covering_check(net, 100_000).max_distance, "<= 0.25")

# closed form versus brute force over the global phase
rng = np.random.default_rng(0)
a, b = rng.uniform(0, 2 * np.pi, (2, 8))
print("diamond", diagonal_diamond_distance(a, b), "grid", diamond_distance_grid(a, b))
print("diag(1,-1) vs identity:", diagonal_diamond_distance([0, math.pi], [0, 0]))
