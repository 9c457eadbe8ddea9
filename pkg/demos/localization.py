"""
Dynamical localization
======================

Starting from n0 = 0 with k = sqrt(3), K = sqrt(2) on six qubits, the
momentum distribution spreads for about pi^2 ~ 10 kicks and then freezes
into an exponential profile exp(-2|n|/ell).
"""

import math

import numpy as np

from sawtooth import measurement as ms
from sawtooth.params import MapParams
from sawtooth.quantum import Propagator, init_momentum_eigenstate

k = math.sqrt(3)
params = MapParams(k=k, T=math.sqrt(2) / k, n_q=6)
traj = Propagator(params).trajectory(init_momentum_eigenstate(0, params), 300)

t_star, D_n, ell_pred = ms.predict_break_time(params)
print(f"predicted break time {t_star:.2f}, localization length {ell_pred:.2f}")

msd = ms.msd_series(traj)
print("empirical break time", ms.detect_break_time(msd, D_n))

dn = ms.default_bin_width(params)
for window in [(10, 20), (100, 110), (290, 300)]:
    W = ms.time_average_distribution(traj, window)
    fit = ms.fit_localization(ms.histogram(W, dn))
    print(f"t in {window}: ell = {fit.ell:5.2f} +- {fit.stderr:.2f}  (R2 {fit.r2:.3f})")

# the profile itself, coarse-grained in bins of dn levels
h = ms.histogram(ms.time_average_distribution(traj, (10, 20)), dn)
for c, w in zip(h.centers, h.prob):
    print(f"{c:6.1f} {w:10.3e} " + "#" * max(0, int(6 * (np.log10(max(w, 1e-12)) + 6))))
