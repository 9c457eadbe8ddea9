"""Gate-level realization of one sawtooth-map iteration.

Bit convention: the theta register holds ``x = theta*N/(2*pi)`` with qubit 0
carrying the most significant bit, i.e. ``x/N = sum_i alpha_i 2**-i`` where
``alpha_1`` sits on qubit 0.

A quadratic phase ``exp(1j*c*(x/N - 1/2)**2)`` factorizes over ordered bit
pairs, since ``x/N - 1/2 = sum_i (alpha_i 2**-i - 1/(2 n_q))``.  The kick
uses ``c = 2*pi**2*k`` and the free rotation ``c = -T*N**2/2``.  Each pair
``(i, j)`` becomes one diagonal two-qubit gate; ``i == j`` pairs are
single-qubit diagonal gates.

The QFT is emitted without the final swaps.  Its output register holds the
plain DFT index ``f`` in bit-reversed qubit order, and the centered
momentum is ``n = f - N*f_1`` (``f_1`` the top bit of ``f``).  That
relabeling flips the top bit relative to the centered index, and is
absorbed into the free-rotation gates instead of costing extra gates.
"""
from __future__ import annotations

import enum
import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .params import MapParams
from .quantum import Basis, StateVector


class GateKind(enum.Enum):
    HADAMARD = "H"
    DIAGONAL1 = "D1"
    DIAGONAL2 = "D2"
    CONTROLLED_PHASE = "CP"
    SWAP_TRACKED = "SWAP"


# kinds that count towards the gate tally; tracked swaps are free
COUNTED = (GateKind.HADAMARD, GateKind.DIAGONAL1, GateKind.DIAGONAL2, GateKind.CONTROLLED_PHASE)


class Role(enum.Enum):
    KICK = "kick"
    FREE = "free"
    QFT = "qft"
    IQFT = "iqft"
    FULL_ITERATION = "full_iteration"


@dataclass(frozen=True)
class Gate:
    """One gate.

    ``phases`` holds the diagonal phase angles: two entries (``|0>, |1>``)
    for ``D1``, four (``|00>, |01>, |10>, |11>`` with the first listed qubit
    as the left bit) for ``D2``, one angle for ``CP``.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    phases: tuple[float, ...] = ()

    def __post_init__(self):
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.kind.value} gate: {self.qubits}")

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind.value, "qubits": list(self.qubits), "phases": list(self.phases)})

    @classmethod
    def from_json(cls, line: str) -> "Gate":
        d = json.loads(line)
        return cls(GateKind(d["kind"]), tuple(d["qubits"]), tuple(float(x) for x in d["phases"]))


@dataclass
class Circuit:
    """Ordered gate list on ``n_q`` qubits.

    ``output_order[b]`` is the physical qubit holding bit ``b`` (``b = 0``
    most significant) of the register after the circuit has run.
    """

    n_q: int
    gates: list[Gate] = field(default_factory=list)
    role: Role = Role.FULL_ITERATION
    output_order: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.output_order is None:
            self.output_order = tuple(range(self.n_q))

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)


def gate_count(circuit: Circuit) -> dict:
    """Tally by gate kind plus the ``total`` of counted gates."""
    tally = Counter(g.kind.value for g in circuit.gates)
    out = {kind.value: tally.get(kind.value, 0) for kind in GateKind}
    out["total"] = sum(tally.get(k.value, 0) for k in COUNTED)
    if circuit.role is Role.FULL_ITERATION:
        expected = 3 * circuit.n_q**2 + circuit.n_q
        if out["total"] != expected:
            raise AssertionError(f"iteration has {out['total']} gates, expected {expected}")
    return out


# -- bit conventions ---------------------------------------------------------

def encode_bits(x: int, n_q: int) -> tuple[int, ...]:
    """Bits ``(alpha_1, ..., alpha_nq)`` of ``x``, most significant first."""
    if not 0 <= x < (1 << n_q):
        raise ValueError(f"{x} does not fit in {n_q} bits")
    return tuple((x >> (n_q - 1 - i)) & 1 for i in range(n_q))


def decode_bits(bits) -> int:
    x = 0
    for b in bits:
        x = (x << 1) | int(b)
    return x


def kick_pair_matrix(i: int, j: int, n_q: int) -> np.ndarray:
    """Diagonal of ``D`` for bit pair ``(i, j)`` (1-based), gate = ``exp(1j*k*pi**2*D)``."""
    c = 1.0 / (2 * n_q)
    ai, aj = 2.0**-i - c, 2.0**-j - c
    return np.array([2 * c * c, -2 * c * aj, -2 * c * ai, 2 * ai * aj])


def _pair_gates(prefactor: float, n_q: int, qubit_of_bit, flip_top: bool) -> list[Gate]:
    """Gates realizing ``exp(1j*prefactor*(sum_i a_i)**2)`` over all ordered bit pairs.

    ``a_i = b_i 2**-i - 1/(2 n_q)`` where ``b_i`` is the register bit, or
    its complement for the top bit when ``flip_top`` is set.
    """
    c = 1.0 / (2 * n_q)

    def a(i, bit):
        if flip_top and i == 1:
            bit = 1 - bit
        return bit * 2.0**-i - c

    gates = []
    for i in range(1, n_q + 1):
        for j in range(1, n_q + 1):
            if i == j:
                ph = tuple(prefactor * a(i, b) ** 2 for b in (0, 1))
                gates.append(Gate(GateKind.DIAGONAL1, (qubit_of_bit[i - 1],), ph))
            else:
                ph = tuple(prefactor * a(i, bi) * a(j, bj) for bi in (0, 1) for bj in (0, 1))
                gates.append(Gate(GateKind.DIAGONAL2, (qubit_of_bit[i - 1], qubit_of_bit[j - 1]), ph))
    return gates


def build_kick_circuit(params: MapParams) -> Circuit:
    n_q = params.n_q
    gates = _pair_gates(2 * math.pi**2 * params.k, n_q, tuple(range(n_q)), flip_top=False)
    return Circuit(n_q, gates, Role.KICK)


def build_free_circuit(params: MapParams, register: str = "centered") -> Circuit:
    """Free rotation ``exp(-1j*T*n**2/2)`` as ``n_q**2`` diagonal gates.

    ``register="centered"``: qubits hold ``m = n + N/2``, most significant
    bit on qubit 0.  ``register="fourier"``: qubits hold the raw DFT index
    in bit-reversed order, as left behind by :func:`build_qft_circuit`.
    """
    n_q = params.n_q
    prefactor = -0.5 * params.T * params.N**2
    if register == "centered":
        gates = _pair_gates(prefactor, n_q, tuple(range(n_q)), flip_top=False)
        order = tuple(range(n_q))
    elif register == "fourier":
        order = tuple(reversed(range(n_q)))
        gates = _pair_gates(prefactor, n_q, order, flip_top=True)
    else:
        raise ValueError(f"unknown register layout {register!r}")
    return Circuit(n_q, gates, Role.FREE, output_order=order)


def build_qft_circuit(n_q: int, swaps: bool = False) -> Circuit:
    """Forward transform ``|x> -> N**-0.5 sum_f exp(-2j*pi*x*f/N) |f>``.

    The sign matches the theta-to-momentum kernel ``exp(-1j*n*theta)``, so
    the controlled phases are ``-pi/2**d``.  Without ``swaps`` the output
    is bit-reversed and recorded in ``output_order``; with ``swaps`` the
    reversal is done by uncounted tracked swaps.
    """
    gates = []
    for q in range(n_q):
        gates.append(Gate(GateKind.HADAMARD, (q,)))
        for d, ctrl in enumerate(range(q + 1, n_q), start=1):
            gates.append(Gate(GateKind.CONTROLLED_PHASE, (ctrl, q), (-math.pi / 2**d,)))
    order = tuple(reversed(range(n_q)))
    if swaps:
        for q in range(n_q // 2):
            gates.append(Gate(GateKind.SWAP_TRACKED, (q, n_q - 1 - q)))
        order = tuple(range(n_q))
    return Circuit(n_q, gates, Role.QFT, output_order=order)


def build_iqft_circuit(n_q: int) -> Circuit:
    """Inverse of the swap-free QFT: bit-reversed Fourier register in, theta register out."""
    qft = build_qft_circuit(n_q)
    gates = [
        Gate(g.kind, g.qubits, tuple(-p for p in g.phases)) for g in reversed(qft.gates)
    ]
    return Circuit(n_q, gates, Role.IQFT)


def build_iteration(params: MapParams) -> Circuit:
    """Kick, QFT, free rotation, inverse QFT: ``3 n_q**2 + n_q`` gates."""
    n_q = params.n_q
    parts = (
        build_kick_circuit(params),
        build_qft_circuit(n_q),
        build_free_circuit(params, register="fourier"),
        build_iqft_circuit(n_q),
    )
    gates = [g for part in parts for g in part.gates]
    return Circuit(n_q, gates, Role.FULL_ITERATION)


# -- statevector kernels -----------------------------------------------------

_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


def _axis(q):
    # amplitude arrays are reshaped to (batch, 2, 2, ..., 2); qubit q is axis q + 1
    return q + 1


def _apply_gate(a: np.ndarray, g: Gate, n_q: int) -> np.ndarray:
    """``a`` has shape ``(batch,) + (2,)*n_q``; updated in place where possible."""
    if g.kind is GateKind.HADAMARD:
        ax = _axis(g.qubits[0])
        a0 = np.take(a, 0, axis=ax)
        a1 = np.take(a, 1, axis=ax)
        return np.stack(((a0 + a1) * _H[0, 0], (a0 - a1) * _H[0, 0]), axis=ax)
    if g.kind is GateKind.SWAP_TRACKED:
        return np.swapaxes(a, _axis(g.qubits[0]), _axis(g.qubits[1]))
    shape = [1] * (n_q + 1)
    if g.kind is GateKind.DIAGONAL1:
        shape[_axis(g.qubits[0])] = 2
        a *= np.exp(1j * np.asarray(g.phases)).reshape(shape)
        return a
    qa, qb = g.qubits
    if g.kind is GateKind.DIAGONAL2:
        ph = np.exp(1j * np.asarray(g.phases)).reshape(2, 2)
    elif g.kind is GateKind.CONTROLLED_PHASE:
        ph = np.array([[1.0, 1.0], [1.0, np.exp(1j * g.phases[0])]])
    else:
        raise ValueError(f"unknown gate kind {g.kind}")
    if qa > qb:
        qa, qb, ph = qb, qa, ph.T
    shape[_axis(qa)] = 2
    shape[_axis(qb)] = 2
    a *= ph.reshape(shape)
    return a


def apply_gates(amplitudes: np.ndarray, circuit: Circuit) -> np.ndarray:
    """Run ``circuit`` on raw amplitudes of shape ``(N,)`` or ``(batch, N)``.

    The returned array is indexed by the physical qubit layout; use
    :func:`logical_order` to read it in the circuit's output bit order.
    """
    n_q = circuit.n_q
    a = np.array(amplitudes, dtype=np.complex128)
    single = a.ndim == 1
    a = a.reshape((-1,) + (2,) * n_q)
    for g in circuit.gates:
        if any(not 0 <= q < n_q for q in g.qubits):
            raise IndexError(f"gate {g} addresses a qubit outside [0, {n_q})")
        a = _apply_gate(a, g, n_q)
    a = np.ascontiguousarray(a).reshape(-1, 1 << n_q)
    return a[0] if single else a


def logical_order(amplitudes: np.ndarray, output_order) -> np.ndarray:
    """Permute physical-qubit amplitudes so bit ``b`` of the index is logical bit ``b``."""
    n_q = len(output_order)
    a = np.asarray(amplitudes)
    lead = a.shape[:-1]
    a = a.reshape(lead + (2,) * n_q)
    k = len(lead)
    a = np.transpose(a, tuple(range(k)) + tuple(k + q for q in output_order))
    return a.reshape(lead + (1 << n_q,))


def apply_circuit(psi: StateVector, circuit: Circuit) -> StateVector:
    """Apply a circuit to a theta-register state.

    Circuits whose role ends in the momentum representation (``QFT``) return
    a momentum state on the centered grid; the rest return theta states.
    """
    if circuit.n_q != psi.params.n_q:
        raise ValueError(f"circuit has {circuit.n_q} qubits, state has {psi.params.n_q}")
    a = logical_order(apply_gates(psi.amplitudes, circuit), circuit.output_order)
    if circuit.role is Role.QFT:
        # the register holds the plain DFT index; centered index flips its top bit
        N = psi.N
        a = a[np.arange(N) ^ (N // 2)]
        return StateVector(a, Basis.MOMENTUM, psi.params)
    return StateVector(a, psi.basis, psi.params)


def evolve_circuit(psi: StateVector, params: MapParams, steps: int, circuit: Circuit | None = None) -> StateVector:
    """Repeated application of the full-iteration circuit to a theta state."""
    if psi.basis is not Basis.THETA:
        raise ValueError("circuit evolution starts from the theta representation")
    circuit = circuit or build_iteration(params)
    a = psi.amplitudes
    for _ in range(steps):
        a = apply_gates(a, circuit)
    return StateVector(a, Basis.THETA, params)


def circuit_diagonal(circuit: Circuit) -> np.ndarray:
    """Diagonal of a circuit made only of diagonal gates, by brute force over basis states."""
    N = 1 << circuit.n_q
    out = np.empty(N, dtype=np.complex128)
    for x in range(N):
        bits = encode_bits(x, circuit.n_q)
        phase = 0.0
        for g in circuit.gates:
            if g.kind is GateKind.DIAGONAL1:
                phase += g.phases[bits[g.qubits[0]]]
            elif g.kind is GateKind.DIAGONAL2:
                phase += g.phases[2 * bits[g.qubits[0]] + bits[g.qubits[1]]]
            elif g.kind is GateKind.CONTROLLED_PHASE:
                phase += g.phases[0] * bits[g.qubits[0]] * bits[g.qubits[1]]
            else:
                raise ValueError("circuit contains a non-diagonal gate")
        out[x] = np.exp(1j * phase)
    return out


def write_jsonl(circuit: Circuit, path) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps({"n_q": circuit.n_q, "role": circuit.role.value,
                             "output_order": list(circuit.output_order)}) + "\n")
        for g in circuit.gates:
            fh.write(g.to_json() + "\n")


def read_jsonl(path) -> Circuit:
    with open(path) as fh:
        head = json.loads(fh.readline())
        gates = [Gate.from_json(line) for line in fh if line.strip()]
    return Circuit(head["n_q"], gates, Role(head["role"]), tuple(head["output_order"]))
