"""Classical and quantum sawtooth map: gate-level simulation and measurement protocols."""

__version__ = "0.1.0"

from .params import MapParams, ParameterError
from .quantum import (
    Basis,
    StateVector,
    Propagator,
    apply_free,
    apply_kick,
    evolve_oracle,
    init_coherent_state,
    init_momentum_eigenstate,
    moments,
    to_momentum,
    to_theta,
)
from .circuit import (
    apply_circuit,
    build_free_circuit,
    build_iteration,
    build_kick_circuit,
    build_qft_circuit,
    gate_count,
)

__all__ = [
    "MapParams",
    "ParameterError",
    "Basis",
    "StateVector",
    "Propagator",
    "apply_free",
    "apply_kick",
    "evolve_oracle",
    "init_coherent_state",
    "init_momentum_eigenstate",
    "moments",
    "to_momentum",
    "to_theta",
    "apply_circuit",
    "build_free_circuit",
    "build_iteration",
    "build_kick_circuit",
    "build_qft_circuit",
    "gate_count",
]
