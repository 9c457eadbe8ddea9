"""
Husimi pictures of the island
=============================

The Husimi function smooths the state over coherent-state cells.  A zero
momentum eigenstate at K = -0.1, averaged over twenty kicks, shows the
island at (pi, 0) standing out of a band of constant momentum.
"""

from pathlib import Path

from sawtooth import export
from sawtooth.husimi import time_averaged_husimi
from sawtooth.params import MapParams
from sawtooth.quantum import Basis, Propagator, init_momentum_eigenstate

out = Path("demo_output")
out.mkdir(exist_ok=True)

params = MapParams.on_torus(-0.1, 1, 8)
traj = Propagator(params).trajectory(init_momentum_eigenstate(0, params), 20, Basis.THETA)
grid = time_averaged_husimi(traj, params, (1, 20), (64, 64))

print("normalization", grid.total())
print("maximum at (theta, p) =", grid.argmax())
export.write_matrix(out / "husimi.txt", grid.values)
export.write_ppm(out / "husimi.ppm", grid.values)
print("wrote", out / "husimi.ppm")
