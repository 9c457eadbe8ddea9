"""Statevector representation and split-operator evolution of the quantum map.

Grids: ``theta_j = 2*pi*j/N`` and centered momenta ``n_m = m - N/2``.  The
change of representation is the centered unitary DFT::

    psi_hat(n_m) = N**-0.5 * sum_j exp(-1j*n_m*theta_j) * psi(theta_j)

which is a standard FFT of ``(-1)**j * psi``.  One map iteration is
``U = exp(-1j*T*n**2/2) exp(1j*k*(theta - pi)**2/2)``: kick in the theta
representation, then free rotation in the momentum representation.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .params import MapParams, ParameterError


class Basis(enum.Enum):
    THETA = "theta"
    MOMENTUM = "momentum"


class BasisError(ValueError):
    """Operation called on a state in the wrong representation."""


@dataclass
class StateVector:
    amplitudes: np.ndarray
    basis: Basis
    params: MapParams

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.params.N,):
            raise ValueError(f"expected {self.params.N} amplitudes, got {self.amplitudes.shape}")

    @property
    def N(self) -> int:
        return self.params.N

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.basis, self.params)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def theta_grid(N: int) -> np.ndarray:
    return 2 * np.pi * np.arange(N) / N


def momentum_grid(N: int) -> np.ndarray:
    return np.arange(N) - N // 2


def _alternating(N):
    return np.where(np.arange(N) % 2 == 0, 1.0, -1.0)


def centered_dft(psi: np.ndarray) -> np.ndarray:
    """Theta amplitudes to centered-momentum amplitudes (works along the last axis)."""
    N = psi.shape[-1]
    return np.fft.fft(psi * _alternating(N), norm="ortho")


def centered_idft(psi_hat: np.ndarray) -> np.ndarray:
    N = psi_hat.shape[-1]
    return np.fft.ifft(psi_hat, norm="ortho") * _alternating(N)


def to_momentum(psi: StateVector) -> StateVector:
    if psi.basis is not Basis.THETA:
        raise BasisError("state is already in the momentum representation")
    return StateVector(centered_dft(psi.amplitudes), Basis.MOMENTUM, psi.params)


def to_theta(psi: StateVector) -> StateVector:
    if psi.basis is not Basis.MOMENTUM:
        raise BasisError("state is already in the theta representation")
    return StateVector(centered_idft(psi.amplitudes), Basis.THETA, psi.params)


def in_basis(psi: StateVector, basis: Basis) -> StateVector:
    if psi.basis is basis:
        return psi
    return to_momentum(psi) if basis is Basis.MOMENTUM else to_theta(psi)


def kick_phases(params: MapParams) -> np.ndarray:
    th = theta_grid(params.N)
    return np.exp(0.5j * params.k * (th - np.pi) ** 2)


def free_phases(params: MapParams) -> np.ndarray:
    n = momentum_grid(params.N).astype(float)
    return np.exp(-0.5j * params.T * n * n)


def apply_kick(psi: StateVector) -> StateVector:
    if psi.basis is not Basis.THETA:
        raise BasisError("kick acts in the theta representation")
    return StateVector(psi.amplitudes * kick_phases(psi.params), Basis.THETA, psi.params)


def apply_free(psi: StateVector) -> StateVector:
    if psi.basis is not Basis.MOMENTUM:
        raise BasisError("free rotation acts in the momentum representation")
    return StateVector(psi.amplitudes * free_phases(psi.params), Basis.MOMENTUM, psi.params)


class Propagator:
    """Split-operator Floquet map with cached phase tables.

    Works on raw amplitude arrays, including stacks of states along
    leading axes.
    """

    def __init__(self, params: MapParams):
        self.params = params
        self.kick = kick_phases(params)
        self.free = free_phases(params)
        self.alt = _alternating(params.N)

    def step_theta(self, a):
        a = np.fft.fft(a * (self.kick * self.alt), norm="ortho")
        return np.fft.ifft(a * self.free, norm="ortho") * self.alt

    def step_momentum(self, a):
        a = np.fft.ifft(a, norm="ortho") * (self.alt * self.kick * self.alt)
        return np.fft.fft(a, norm="ortho") * self.free

    def trajectory(self, psi: StateVector, steps: int, basis: Basis = Basis.MOMENTUM) -> np.ndarray:
        """Amplitudes at ``t = 0..steps`` in ``basis``, shape ``(steps + 1, N)``."""
        out = np.empty((steps + 1, self.params.N), dtype=np.complex128)
        a = in_basis(psi, Basis.THETA).amplitudes
        for t in range(steps + 1):
            if t:
                a = self.step_theta(a)
            out[t] = a
        if basis is Basis.MOMENTUM:
            out = centered_dft(out)
        return out


def evolve_oracle(psi: StateVector, params: MapParams | None = None, steps: int = 1) -> StateVector:
    """Apply the Floquet operator ``steps`` times; the result stays in ``psi.basis``."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    params = params or psi.params
    prop = Propagator(params)
    a = psi.amplitudes.copy()
    stepper = prop.step_theta if psi.basis is Basis.THETA else prop.step_momentum
    for _ in range(steps):
        a = stepper(a)
    return StateVector(a, psi.basis, params)


def dft_matrix(N: int) -> np.ndarray:
    """Dense centered DFT matrix, built element by element from the kernel."""
    th = theta_grid(N)
    n = momentum_grid(N)
    return np.exp(-1j * np.outer(n, th)) / math.sqrt(N)


def floquet_matrix(params: MapParams) -> np.ndarray:
    """Dense one-step propagator in the theta representation."""
    F = dft_matrix(params.N)
    return F.conj().T @ np.diag(free_phases(params)) @ F @ np.diag(kick_phases(params))


def init_momentum_eigenstate(n0: int, params: MapParams) -> StateVector:
    N = params.N
    if not -N // 2 <= n0 <= N // 2 - 1:
        raise ValueError(f"n0={n0} outside momentum grid [{-N // 2}, {N // 2 - 1}]")
    a = np.zeros(N, dtype=np.complex128)
    a[n0 + N // 2] = 1.0
    return StateVector(a, Basis.MOMENTUM, params)


def init_theta_eigenstate(j: int, params: MapParams) -> StateVector:
    a = np.zeros(params.N, dtype=np.complex128)
    a[j] = 1.0
    return StateVector(a, Basis.THETA, params)


def coherent_widths(s: float, params: MapParams) -> tuple[float, float]:
    """``(d_theta, d_p)`` with ``d_p/d_theta = s`` and ``d_p*d_theta = hbar_eff/2``."""
    if s <= 0:
        raise ValueError("squeezing s must be positive")
    dth = math.sqrt(params.hbar_eff / (2 * s))
    return dth, s * dth


def _image_count(dth: float) -> int:
    # smallest W with exp(-(2*pi*W - pi)**2 / (4 dth**2)) < 1e-16, at least 3
    W = 3
    while -((2 * math.pi * W - math.pi) ** 2) / (4 * dth * dth) > math.log(1e-16):
        W += 1
    return W


def coherent_amplitudes(theta0, p0, s: float, params: MapParams) -> np.ndarray:
    """Unnormalized periodized Gaussians in the theta representation.

    ``theta0`` and ``p0`` broadcast against each other; the result has
    shape ``broadcast(theta0, p0).shape + (N,)``.
    """
    dth, _ = coherent_widths(s, params)
    N = params.N
    th = theta_grid(N)
    theta0 = np.asarray(theta0, dtype=float)[..., None]
    n0 = np.asarray(p0, dtype=float)[..., None] / params.T
    W = _image_count(dth)
    acc = 0.0
    for w in range(-W, W + 1):
        x = th - theta0 + 2 * np.pi * w
        # wrap the offset so the dominant image sits near x = 0
        acc = acc + np.exp(-(x * x) / (4 * dth * dth) + 1j * n0 * x)
    return acc


def init_coherent_state(theta0: float, p0: float, s: float, params: MapParams) -> StateVector:
    """Minimum-uncertainty wavepacket at ``(theta0, p0)``, periodized on the torus."""
    theta0 = math.fmod(theta0, 2 * math.pi)
    if theta0 < 0:
        theta0 += 2 * math.pi
    a = coherent_amplitudes(theta0, p0, s, params)
    a /= np.linalg.norm(a)
    return StateVector(a, Basis.THETA, params)


@dataclass(frozen=True)
class Moments:
    n_mean: float
    n_var: float
    theta_mean: float
    theta_var: float


def momentum_moments(probs: np.ndarray) -> tuple[float, float]:
    """Mean and variance of ``n`` for distributions on the centered grid (last axis)."""
    n = momentum_grid(probs.shape[-1]).astype(float)
    mean = probs @ n
    var = probs @ (n * n) - mean**2
    return mean, np.maximum(var, 0.0)


def moments(psi: StateVector) -> Moments:
    """Momentum mean/variance and circular theta mean/variance.

    The theta variance is taken over deviations wrapped into ``[-pi, pi)``
    around the circular mean.
    """
    pn = in_basis(psi, Basis.MOMENTUM).probabilities()
    pth = in_basis(psi, Basis.THETA).probabilities()
    n_mean, n_var = momentum_moments(pn)
    th = theta_grid(psi.N)
    th_mean = float(np.angle(pth @ np.exp(1j * th))) % (2 * np.pi)
    dev = np.mod(th - th_mean + np.pi, 2 * np.pi) - np.pi
    th_var = float(pth @ (dev * dev) - (pth @ dev) ** 2)
    return Moments(float(n_mean), float(n_var), th_mean, th_var)


def check_normalized(psi: StateVector, tol: float = 1e-12):
    if abs(psi.norm() - 1.0) > tol:
        raise ParameterError(f"state is not normalized (norm={psi.norm():.15g})")
