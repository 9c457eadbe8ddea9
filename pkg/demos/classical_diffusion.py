"""
Classical diffusion in the sawtooth map
=======================================

Three regimes of momentum spreading: fast normal diffusion for K > 1,
cantori-limited diffusion for 0 < K < 1, and anomalous spreading around
the stable islands for -4 < K < 0.
"""

import math

import numpy as np

from sawtooth import classical as cm
from sawtooth.params import MapParams

# K = 5: the random-phase estimate pi^2 K^2 / 3 is accurate
params = MapParams.classical(5.0)
ens = cm.Ensemble.random_phases(10_000, seed=1)
series = cm.evolve_ensemble(ens, params, 100)
fit = cm.fit_diffusion(series)
print(f"K=5    D={fit.D:8.2f}   pi^2 K^2/3={math.pi**2 / 3 * 25:8.2f}")

# K = 0.5: broken tori slow things down, D ~ 3.3 K^(5/2)
series = cm.evolve_ensemble(cm.Ensemble.random_phases(10_000, seed=2), MapParams.classical(0.5), 1000)
fit = cm.fit_diffusion(series)
print(f"K=0.5  D={fit.D:8.4f}   3.3 K^2.5={3.3 * 0.5**2.5:8.4f}")

# K = -0.1: start outside the main island; <p^2> grows like t^alpha, alpha < 1.
# The exponent settles slowly, so this takes a few seconds.
K = -0.1
ens = cm.Ensemble.random_phases(10_000, 1.0, seed=3, exclude=lambda th, p: cm.main_island_mask(th, p, K))
series = cm.evolve_ensemble(ens, MapParams.classical(K), 30_000, threads=4)
fit = cm.fit_diffusion(series)
print(f"K=-0.1 alpha={fit.alpha:.3f}  (normal diffusion: {fit.normal})")

# log-log slope over successive decades
for a, b in [(100, 1000), (1000, 10_000), (10_000, 30_000)]:
    slope = np.polyfit(np.log(series.t[a:b]), np.log(series.msd[a:b]), 1)[0]
    print(f"   t in [{a}, {b}): local exponent {slope:.3f}")
