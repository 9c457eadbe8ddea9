"""Classical sawtooth map, ensemble diffusion and phase-space densities.

One iteration in action-angle variables::

    n' = n + k*(theta - pi)
    theta' = theta + T*n'   (mod 2*pi)

With ``p = T*n`` only ``K = k*T`` matters.  Ensembles are evolved in ``p``
units with numpy arrays; the single-state :func:`step` keeps ``n`` units.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .params import MapParams, ParameterError

TWO_PI = 2 * math.pi

# particles per work unit; fixed so results do not depend on the thread count
CHUNK = 4096


@dataclass(frozen=True)
class ClassicalState:
    n: float
    theta: float


@dataclass
class Ensemble:
    """Initial conditions of an ensemble, stored in ``p = T*n`` units."""

    theta: np.ndarray
    p: np.ndarray
    p0: float
    seed: int | None = None
    rng_name: str = "numpy.PCG64"

    def __len__(self):
        return len(self.theta)

    @classmethod
    def random_phases(
        cls,
        size: int,
        p0: float = 0.0,
        seed: int = 0,
        exclude: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
    ) -> "Ensemble":
        """``size`` particles at momentum ``p0`` with uniform random phases.

        ``exclude(theta, p)`` returns a boolean mask of rejected initial
        conditions; rejected phases are redrawn.
        """
        if size < 1:
            raise ValueError("ensemble must contain at least one particle")
        rng = np.random.default_rng(seed)
        thetas = []
        have = 0
        for _ in range(10_000):
            theta = rng.uniform(0.0, TWO_PI, size)
            if exclude is not None:
                theta = theta[~exclude(theta, np.full_like(theta, p0))]
            thetas.append(theta)
            have += len(theta)
            if have >= size:
                break
        else:
            raise ValueError("exclusion predicate rejects (almost) every initial condition")
        theta = np.concatenate(thetas)[:size]
        return cls(theta=theta, p=np.full(size, float(p0)), p0=float(p0), seed=seed)

    @classmethod
    def from_states(cls, states, params: MapParams, p0: float | None = None) -> "Ensemble":
        theta = np.array([s.theta for s in states], dtype=float)
        p = params.T * np.array([s.n for s in states], dtype=float)
        if len(theta) == 0:
            raise ValueError("empty ensemble")
        return cls(theta=theta, p=p, p0=float(p[0]) if p0 is None else p0)


@dataclass
class MSDSeries:
    """Ensemble mean square displacement ``<(p - p0)^2>`` for ``t = 0..t_max``."""

    t: np.ndarray
    msd: np.ndarray
    stderr: np.ndarray
    meta: dict = field(default_factory=dict)


@dataclass
class DiffusionEstimate:
    D: float
    alpha: float
    prefactor: float
    fit_window: tuple[int, int]
    stderr: dict
    normal: bool


def _wrap_theta(theta):
    theta = np.mod(theta, TWO_PI)
    # mod of a tiny negative number rounds up to exactly 2*pi
    return np.where(theta >= TWO_PI, 0.0, theta)


def _wrap_p(p, L):
    half = math.pi * L
    p = np.mod(p + half, 2 * half) - half
    return np.where(p >= half, p - 2 * half, p)


def step(state: ClassicalState, params: MapParams) -> ClassicalState:
    n = state.n + params.k * (state.theta - math.pi)
    theta = float(_wrap_theta(state.theta + params.T * n))
    if params.torus:
        n = float(_wrap_p(params.T * n, params.L)) / params.T
    return ClassicalState(n=n, theta=theta)


def step_inverse(state: ClassicalState, params: MapParams) -> ClassicalState:
    """Exact inverse of :func:`step` on the cylinder."""
    theta = float(_wrap_theta(state.theta - params.T * state.n))
    n = state.n - params.k * (theta - math.pi)
    return ClassicalState(n=n, theta=theta)


def step_arrays(theta, p, K: float, L: int | None = None):
    """Vectorized iteration in ``p`` units; returns new ``(theta, p)``."""
    p = p + K * (theta - math.pi)
    theta = _wrap_theta(theta + p)
    if L is not None:
        p = _wrap_p(p, L)
    return theta, p


def jacobian(params: MapParams) -> np.ndarray:
    """Tangent map in ``(n, theta)`` coordinates; constant away from theta = 0."""
    return np.array([[1.0, params.k], [params.T, 1.0 + params.K]])


def _msd_chunk(theta, p, p0, K, L, t_max):
    s1 = np.empty(t_max + 1)
    s2 = np.empty(t_max + 1)
    d2 = (p - p0) ** 2
    s1[0], s2[0] = d2.sum(), (d2 * d2).sum()
    for t in range(1, t_max + 1):
        theta, p = step_arrays(theta, p, K, L)
        d2 = (p - p0) ** 2
        s1[t] = d2.sum()
        s2[t] = (d2 * d2).sum()
    return s1, s2


def evolve_ensemble(ens: Ensemble, params: MapParams, t_max: int, threads: int = 1) -> MSDSeries:
    """Iterate every particle ``t_max`` times and record ``<(p - p0)^2>``.

    Work is split into fixed-size chunks whose partial sums are reduced in
    chunk order, so the result is bit-identical for any ``threads``.
    """
    if len(ens) == 0:
        raise ValueError("empty ensemble")
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    M = len(ens)
    bounds = [(i, min(i + CHUNK, M)) for i in range(0, M, CHUNK)]

    def work(b):
        lo, hi = b
        return _msd_chunk(ens.theta[lo:hi], ens.p[lo:hi], ens.p0, params.K, params.L, t_max)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    s1 = np.zeros(t_max + 1)
    s2 = np.zeros(t_max + 1)
    for a, b in parts:
        s1 += a
        s2 += b
    msd = s1 / M
    var = np.maximum(s2 / M - msd**2, 0.0)
    stderr = np.sqrt(var / M) if M > 1 else np.zeros_like(msd)
    meta = {"particles": M, "p0": ens.p0, "seed": ens.seed, "rng": ens.rng_name}
    return MSDSeries(t=np.arange(t_max + 1), msd=msd, stderr=stderr, meta=meta)


def fit_diffusion(series, fit_window: tuple[int, int] | None = None, alpha_tol: float = 0.15) -> DiffusionEstimate:
    """Fit ``<(dp)^2> = A * t**alpha`` on a log-log scale.

    ``series`` is an :class:`MSDSeries` or an array indexed by ``t``.  The
    default window drops the first 10% of the series.  When ``alpha`` is
    within ``alpha_tol`` of one, ``D`` is the slope of a straight-line fit
    over the same window; otherwise ``D`` is nan and ``normal`` is False.
    """
    y = np.asarray(series.msd if isinstance(series, MSDSeries) else series, dtype=float)
    t_all = np.arange(len(y))
    if fit_window is None:
        fit_window = (max(1, math.ceil(0.1 * (len(y) - 1))), len(y) - 1)
    lo, hi = fit_window
    t = t_all[lo : hi + 1].astype(float)
    y = y[lo : hi + 1]
    t, y = t[t > 0], y[t > 0]
    if len(t) < 4:
        raise ValueError("need at least 4 points inside the fit window")
    if np.all(y == 0):
        return DiffusionEstimate(
            D=0.0, alpha=0.0, prefactor=0.0, fit_window=(lo, hi),
            stderr={"D": 0.0, "alpha": 0.0}, normal=False,
        )
    if np.any(y <= 0):
        raise ValueError("log-log fit needs a strictly positive series")

    X = np.column_stack([np.ones_like(t), np.log(t)])
    coef, cov = _lstsq(X, np.log(y))
    log_a, alpha = coef
    Xl = np.column_stack([np.ones_like(t), t])
    lin, lin_cov = _lstsq(Xl, y)
    normal = abs(alpha - 1.0) <= alpha_tol
    return DiffusionEstimate(
        D=float(lin[1]) if normal else math.nan,
        alpha=float(alpha),
        prefactor=float(math.exp(log_a)),
        fit_window=(lo, hi),
        stderr={"D": float(math.sqrt(lin_cov[1, 1])), "alpha": float(math.sqrt(cov[1, 1]))},
        normal=bool(normal),
    )


def _lstsq(X, y):
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    dof = max(len(y) - X.shape[1], 1)
    resid = y - X @ coef
    s2 = resid @ resid / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    return coef, cov


def phase_space_density(
    ens: Ensemble,
    params: MapParams,
    t_max: int,
    grid: tuple[int, int] = (128, 128),
    p_window: tuple[float, float] | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Occupation density over ``(theta, p)`` accumulated over ``t = 0..t_max``.

    Returns ``(density, theta_edges, p_edges)`` with ``density[row, col]``,
    rows running over ``p`` (increasing) and columns over ``theta``.  The
    density integrates to one over the window.
    """
    rows, cols = grid
    if rows < 2 or cols < 2:
        raise ValueError("grid dimensions must be >= 2")
    if p_window is None:
        if not params.torus:
            raise ParameterError("cylinder geometry needs an explicit p_window")
        p_window = (-math.pi * params.L, math.pi * params.L)
    theta_edges = np.linspace(0.0, TWO_PI, cols + 1)
    p_edges = np.linspace(p_window[0], p_window[1], rows + 1)
    counts = np.zeros((rows, cols))
    theta, p = ens.theta.copy(), ens.p.copy()
    for t in range(t_max + 1):
        if t:
            theta, p = step_arrays(theta, p, params.K, params.L)
        h, _, _ = np.histogram2d(p, theta, bins=(p_edges, theta_edges))
        counts += h
    total = counts.sum()
    if total == 0:
        raise ValueError("no trajectory points inside the p window")
    cell = (theta_edges[1] - theta_edges[0]) * (p_edges[1] - p_edges[0])
    return counts / (total * cell), theta_edges, p_edges


def island_rotation_frequency(params_or_K) -> float:
    """Rotation angle per iteration around the elliptic fixed point ``(n, theta) = (0, pi)``.

    The tangent map has trace ``2 + K`` and unit determinant, so the
    eigenvalues are ``exp(+-i*omega)`` with ``cos(omega) = 1 + K/2``.
    """
    K = params_or_K.K if isinstance(params_or_K, MapParams) else float(params_or_K)
    if not -4.0 < K < 0.0:
        raise ValueError(f"fixed point is not elliptic for K={K}; need -4 < K < 0")
    return math.acos(1.0 + K / 2.0)


def main_island_mask(theta, p, K: float, scale: float = 1.0):
    """True inside the invariant ellipse of the linearized map through ``scale*pi``.

    Points ``(x, p) = (theta - pi, p)`` obey ``x' = (1+K) x + p``,
    ``p' = K x + p``; the conserved quadratic form is
    ``p**2 + K*x*p - K*x**2`` (up to sign).  The ellipse touching
    ``x = +-pi`` bounds the region free of the discontinuity at theta = 0.
    """
    x = np.asarray(theta) - math.pi
    p = np.asarray(p)
    q = p * p + K * x * p - K * x * x
    # max |x| on the level set q = c is sqrt(c / (-K - K**2/4))
    c_max = (-K - K * K / 4.0) * (scale * math.pi) ** 2
    return q < c_max
