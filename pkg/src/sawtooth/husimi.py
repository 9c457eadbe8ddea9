"""Husimi phase-space distributions on the torus.

``H(theta0, p0) = |<coh(theta0, p0, s)|psi>|**2 / (2*pi*hbar_eff)`` with the
periodized coherent states of :mod:`sawtooth.quantum`.  Grid cells are
evaluated at their lower-left corners, so ``(pi, 0)`` is a grid node
whenever the column count and row count are even.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import MapParams
from .quantum import Basis, StateVector, coherent_amplitudes, in_basis

MIN_GRID = 8
# templates above this many complex entries are rebuilt block by block
_CACHE_LIMIT = 1 << 22


@dataclass
class HusimiGrid:
    """``values[row, col]``: rows run over ``p`` (increasing), columns over ``theta``."""

    values: np.ndarray
    theta: np.ndarray
    p: np.ndarray
    s: float

    @property
    def cell_area(self) -> float:
        return float((self.theta[1] - self.theta[0]) * (self.p[1] - self.p[0]))

    def total(self) -> float:
        return float(self.values.sum() * self.cell_area)

    def argmax(self) -> tuple[float, float]:
        r, c = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.theta[c]), float(self.p[r])


def grid_axes(params: MapParams, shape: tuple[int, int]):
    rows, cols = shape
    if rows < MIN_GRID or cols < MIN_GRID:
        raise ValueError(f"Husimi grid must be at least {MIN_GRID}x{MIN_GRID}, got {rows}x{cols}")
    p_lo, p_hi = params.p_window
    theta = 2 * np.pi * np.arange(cols) / cols
    p = p_lo + (p_hi - p_lo) * np.arange(rows) / rows
    return theta, p


class HusimiProjector:
    """Coherent-state templates for one grid, reusable across many states."""

    def __init__(self, params: MapParams, shape: tuple[int, int] = (64, 64), s: float = 1.0):
        self.params = params
        self.s = s
        self.theta, self.p = grid_axes(params, shape)
        self._scale = 1.0 / (2 * np.pi * params.hbar_eff)
        size = len(self.theta) * len(self.p) * params.N
        self._block = len(self.p) if size <= _CACHE_LIMIT else max(1, _CACHE_LIMIT // (len(self.theta) * params.N))
        self._bra = self._templates(0, len(self.p)) if self._block == len(self.p) else None

    def _templates(self, r0, r1):
        coh = coherent_amplitudes(self.theta[None, :], self.p[r0:r1, None], self.s, self.params)
        coh /= np.linalg.norm(coh, axis=-1, keepdims=True)
        return coh.conj()

    def values(self, theta_amplitudes: np.ndarray) -> np.ndarray:
        """Husimi values for theta amplitudes of shape ``(N,)`` or ``(T, N)``."""
        a = np.asarray(theta_amplitudes)
        if self._bra is not None:
            ov = np.tensordot(a, self._bra, axes=([-1], [-1]))
        else:
            ov = np.concatenate(
                [np.tensordot(a, self._templates(r, r + self._block), axes=([-1], [-1]))
                 for r in range(0, len(self.p), self._block)],
                axis=-2,
            )
        return np.abs(ov) ** 2 * self._scale

    def __call__(self, psi: StateVector) -> HusimiGrid:
        a = in_basis(psi, Basis.THETA).amplitudes
        return HusimiGrid(self.values(a), self.theta, self.p, self.s)


def husimi(psi: StateVector, grid: tuple[int, int] = (64, 64), s: float = 1.0) -> HusimiGrid:
    return HusimiProjector(psi.params, grid, s)(psi)


def time_averaged_husimi(
    trajectory_theta: np.ndarray,
    params: MapParams,
    window: tuple[int, int],
    grid: tuple[int, int] = (64, 64),
    s: float = 1.0,
) -> HusimiGrid:
    """Pointwise mean of Husimi grids over ``t = window[0]..window[1]``.

    ``trajectory_theta`` holds theta-representation amplitudes, time first.
    """
    a, b = window
    if b < a:
        raise ValueError("empty averaging window")
    proj = HusimiProjector(params, grid, s)
    acc = np.zeros((len(proj.p), len(proj.theta)))
    for t in range(a, b + 1):
        acc += proj.values(trajectory_theta[t])
    return HusimiGrid(acc / (b - a + 1), proj.theta, proj.p, s)
