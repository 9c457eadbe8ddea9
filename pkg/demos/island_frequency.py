"""
Island rotation frequency
=========================

Inside the stable island at (pi, 0) the map is a rotation with frequency
arccos(1 + K/2).  A coherent state placed off-centre circles the island,
and the peak of the spectrum of <exp(i theta)>(t) recovers the frequency.
"""

import math

from sawtooth import classical as cm
from sawtooth import measurement as ms
from sawtooth.params import MapParams
from sawtooth.quantum import Basis, Propagator, init_coherent_state, init_momentum_eigenstate

for K in (-0.1, -1.0, -2.0):
    params = MapParams.on_torus(K, 1, 8)
    ref = cm.island_rotation_frequency(params)
    psi = init_coherent_state(math.pi + 1.0, 0.0, 1.0, params)
    traj = Propagator(params).trajectory(psi, 400, Basis.THETA)
    com = ms.estimate_frequency(ms.center_of_mass_series(traj), "center-of-mass")
    traj_n = Propagator(params).trajectory(init_momentum_eigenstate(0, params), 400)
    var = ms.estimate_frequency(ms.msd_series(traj_n), "variance")
    print(f"K={K:5.1f}  reference {ref:.4f}  centre of mass {com.omega:.4f}  variance {var.omega:.4f}")
