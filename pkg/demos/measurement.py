"""
Reading the localization length from measurements
==================================================

On hardware the profile is only seen through projective measurements.
Reading the three most significant qubits bins the momentum into eight
groups of eight levels.  The spread of the fitted ell over repeated
experiments shrinks roughly like 1/sqrt(shots).
"""

import math

import numpy as np

from sawtooth import measurement as ms
from sawtooth.params import MapParams
from sawtooth.quantum import Propagator, init_momentum_eigenstate

k = math.sqrt(3)
params = MapParams(k=k, T=math.sqrt(2) / k, n_q=6)
traj = Propagator(params).trajectory(init_momentum_eigenstate(0, params), 20)
W = ms.time_average_distribution(traj, (10, 20))

exact = ms.fit_localization(ms.histogram(W, 8))
print(f"exact distribution, 8-level bins: ell = {exact.ell:.2f}")

spreads = []
for shots in (100, 1000, 10_000):
    ells = []
    for seed in ms.spawn_seeds(7, 200):
        rec = ms.sample_momentum(W, shots, seed, truncate_to_m_qubits=3)
        ells.append(ms.fit_localization(ms.histogram(rec, rec.bin_width), floor=1.5 / shots).ell)
    spreads.append(np.std(ells, ddof=1))
    print(f"shots={shots:6d}  mean ell {np.mean(ells):6.2f}  spread {spreads[-1]:.3f}")
slope = np.polyfit(np.log([100, 1000, 10_000]), np.log(spreads), 1)[0]
print(f"spread ~ shots^{slope:.2f}")

# truncated reads and binned full reads are the same distribution
a = ms.sample_momentum(W, 100_000, seed=1, truncate_to_m_qubits=3)
b = ms.sample_momentum(W, 100_000, seed=2)
print("chi-square p-value", ms.chi_square_same_distribution(ms.histogram(a, 8).counts, ms.histogram(b, 8).counts))
