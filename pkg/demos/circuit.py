"""
One map iteration as a gate sequence
====================================

The kick and the free rotation are quadratic phases that split into
n_q^2 one- and two-qubit diagonal gates each.  Together with a QFT and
its inverse that gives 3 n_q^2 + n_q gates per iteration.  Here the gate
sequence is run on a statevector and compared with the FFT propagator.
"""

import math
from pathlib import Path

import numpy as np

from sawtooth.circuit import build_iteration, evolve_circuit, gate_count, write_jsonl
from sawtooth.params import MapParams
from sawtooth.quantum import Basis, StateVector, evolve_oracle

k = math.sqrt(3)
for n_q in range(1, 9):
    params = MapParams(k=k, T=math.sqrt(2) / k, n_q=n_q)
    circ = build_iteration(params)
    rng = np.random.default_rng(n_q)
    v = rng.normal(size=params.N) + 1j * rng.normal(size=params.N)
    psi = StateVector(v / np.linalg.norm(v), Basis.THETA, params)
    a = evolve_circuit(psi, params, 20, circ).amplitudes
    b = evolve_oracle(psi, params, 20).amplitudes
    tally = gate_count(circ)
    print(f"n_q={n_q}  gates={tally['total']:4d} (H {tally['H']}, CP {tally['CP']}, "
          f"D1 {tally['D1']}, D2 {tally['D2']})  1-fidelity={1 - abs(np.vdot(b, a)):.1e}")

# the gate list can be exported for external checking
out = Path("demo_output")
out.mkdir(exist_ok=True)
write_jsonl(build_iteration(MapParams(k=k, T=0.8, n_q=3)), out / "circuit_nq3.jsonl")
