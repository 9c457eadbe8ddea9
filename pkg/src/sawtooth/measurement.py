"""Information extraction from simulated wavefunctions.

Projective momentum measurements (optionally of the most significant qubits
only), coarse-grained histograms, exponential localization fits, break-time
estimates, mean-square-moment series and island-frequency estimation.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .params import MapParams
from .quantum import Basis, StateVector, in_basis, momentum_grid, momentum_moments


class FitError(ValueError):
    """Not enough informative bins to determine the fit."""


class NoSignalError(ValueError):
    """No spectral peak stands out of the noise floor."""


class Source(enum.Enum):
    EXACT = "exact"
    SAMPLED = "sampled"


@dataclass
class ShotRecord:
    """Measured momenta.  With truncation each outcome is the lowest ``n`` of its bin."""

    outcomes: np.ndarray
    N: int
    seed: int | None = None
    truncated_to_qubits: int | None = None

    @property
    def shots(self) -> int:
        return len(self.outcomes)

    @property
    def bin_width(self) -> int:
        if self.truncated_to_qubits is None:
            return 1
        return self.N >> self.truncated_to_qubits


@dataclass
class MomentumHistogram:
    """Coarse-grained momentum distribution.

    ``prob[b]`` is the probability mass in ``[edges[b], edges[b+1])`` and
    ``centers[b]`` the mean of the integer momenta in that bin.
    ``counts`` is only set for sampled histograms.
    """

    edges: np.ndarray
    prob: np.ndarray
    centers: np.ndarray
    source: Source
    counts: np.ndarray | None = None

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def density(self) -> np.ndarray:
        """Probability per momentum level, comparable to ``W_n``."""
        return self.prob / self.widths

    @property
    def shots(self) -> int | None:
        return None if self.counts is None else int(self.counts.sum())


@dataclass
class LocalizationFit:
    ell: float
    n0: float
    stderr: float
    fit_range: tuple[float, float]
    r2: float
    bins_used: int
    amplitude: float
    localized: bool = True


@dataclass
class FrequencyEstimate:
    omega: float
    amplitude: float
    method: str
    stderr: float
    harmonic: int = 1
    flags: list = field(default_factory=list)


# -- sampling ------------------------------------------------------------------

def momentum_distribution(psi: StateVector) -> np.ndarray:
    return in_basis(psi, Basis.MOMENTUM).probabilities()


def _as_probs(source) -> np.ndarray:
    if isinstance(source, StateVector):
        p = momentum_distribution(source)
    elif isinstance(source, MomentumHistogram):
        if not np.all(source.widths == 1):
            raise ValueError("sampling needs a level-resolved distribution")
        p = source.prob
    else:
        p = np.asarray(source, dtype=float)
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"distribution is not normalized (sum={p.sum():.12g})")
    return p / p.sum()


def sample_momentum(psi, shots: int, seed=None, truncate_to_m_qubits: int | None = None) -> ShotRecord:
    """Simulate ``shots`` projective measurements in the momentum basis.

    ``psi`` may be a state, a level-resolved histogram or a probability
    vector on the centered grid.  With ``truncate_to_m_qubits=m`` only the
    ``m`` most significant qubits of the centered register are read, which
    draws directly from the marginal over bins of ``N/2**m`` levels.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = _as_probs(psi)
    N = len(p)
    n_q = N.bit_length() - 1
    rng = np.random.default_rng(seed)
    if truncate_to_m_qubits is None:
        idx = rng.choice(N, size=shots, p=p)
        return ShotRecord(idx - N // 2, N, seed)
    m = truncate_to_m_qubits
    if not 0 <= m <= n_q:
        raise ValueError(f"cannot read {m} of {n_q} qubits")
    w = N >> m
    marginal = p.reshape(1 << m, w).sum(axis=1)
    labels = rng.choice(1 << m, size=shots, p=marginal / marginal.sum())
    return ShotRecord(labels * w - N // 2, N, seed, m)


def spawn_seeds(master_seed: int, runs: int) -> list:
    """Independent per-run RNG streams derived from one master seed."""
    return np.random.SeedSequence(master_seed).spawn(runs)


# -- histograms ----------------------------------------------------------------

def _bin_edges(N: int, dn: int) -> np.ndarray:
    lo, hi = -N // 2, N // 2
    edges = np.arange(lo, hi, dn)
    return np.append(edges, hi)


def histogram(source, dn: int = 1, N: int | None = None) -> MomentumHistogram:
    """Coarse-grain into bins of ``dn`` levels starting at ``n = -N/2``.

    ``source`` is a :class:`StateVector` (exact), a probability vector on the
    centered grid (exact), or a :class:`ShotRecord` (sampled).  Truncated shot
    records need ``dn`` to be a multiple of their bin width.
    """
    if isinstance(source, ShotRecord):
        N = source.N
    elif isinstance(source, StateVector):
        N = source.N
    else:
        source = np.asarray(source, dtype=float)
        N = len(source)
    if int(dn) != dn or dn < 1:
        raise ValueError("bin width must be a positive integer")
    if dn > N:
        raise ValueError(f"bin width {dn} exceeds the register size {N}")
    edges = _bin_edges(N, dn)
    levels = momentum_grid(N)
    which = np.searchsorted(edges, levels, side="right") - 1
    nb = len(edges) - 1
    centers = np.bincount(which, weights=levels, minlength=nb) / np.bincount(which, minlength=nb)
    if isinstance(source, ShotRecord):
        if source.bin_width > 1 and dn % source.bin_width:
            raise ValueError(f"bin width {dn} is not a multiple of the measured resolution {source.bin_width}")
        b = np.searchsorted(edges, source.outcomes, side="right") - 1
        counts = np.bincount(b, minlength=nb).astype(float)
        return MomentumHistogram(edges, counts / counts.sum(), centers, Source.SAMPLED, counts)
    p = momentum_distribution(source) if isinstance(source, StateVector) else source
    prob = np.bincount(which, weights=p, minlength=nb)
    return MomentumHistogram(edges, prob, centers, Source.EXACT)


def default_bin_width(params: MapParams) -> int:
    _, _, ell = predict_break_time(params)
    return max(1, round(ell / 6))


# -- localization ----------------------------------------------------------------

def predict_break_time(params_or_k) -> tuple[float, float, float]:
    """``(t_star, D_n, ell)`` from the random-phase diffusion rate ``pi**2 k**2 / 3``."""
    k = params_or_k.k if isinstance(params_or_k, MapParams) else float(params_or_k)
    D_n = math.pi**2 / 3 * k * k
    return D_n, D_n, D_n


def fit_localization(
    hist: MomentumHistogram,
    n0: float = 0.0,
    floor: float | None = None,
    mode: str = "two-sided",
    max_distance: float | None = None,
    localized_fraction: float = 0.25,
) -> LocalizationFit:
    """Fit ``W_n ~ exp(-2|n - n0|/ell)`` to a histogram.

    Least squares of ``ln W`` against ``|n - n0|`` over bins above ``floor``
    (probability mass per bin; default ``max(10/shots, 1e-12)``), weighted by
    bin mass so that exact data and the large-shot limit agree.  Bins
    straddling ``n0`` are left out.  ``mode="one-sided"`` uses only bins
    with ``n >= n0``.  The fit is flagged as not ``localized`` when
    ``ell >= localized_fraction * N``.
    """
    if floor is None:
        floor = max(10.0 / hist.shots, 1e-12) if hist.shots else 1e-12
    lo, hi = hist.edges[:-1], hist.edges[1:] - 1
    straddle = (lo < n0) & (hi > n0)
    keep = (hist.prob > floor) & ~straddle
    if mode == "one-sided":
        keep &= lo >= n0
    elif mode != "two-sided":
        raise ValueError(f"unknown mode {mode!r}")
    dist = np.abs(hist.centers - n0)
    if max_distance is not None:
        keep &= dist <= max_distance
    right = keep & (hist.centers >= n0)
    left = keep & (hist.centers < n0)
    if mode == "two-sided" and (right.sum() < 3 or left.sum() < 3) and keep.sum() < 4:
        raise FitError(f"only {int(right.sum())}+{int(left.sum())} usable bins")
    if keep.sum() < 3:
        raise FitError(f"only {int(keep.sum())} usable bins for a 2-parameter fit")

    x = dist[keep]
    y = np.log(hist.density[keep])
    # ln(count) has variance ~1/count: weight by counts, or by mass for exact data
    w = hist.counts[keep] if hist.source is Source.SAMPLED else hist.prob[keep]
    X = np.column_stack([np.ones_like(x), x])
    Xw = X * w[:, None]
    A = X.T @ Xw
    coef = np.linalg.solve(A, Xw.T @ y)
    resid = y - X @ coef
    dof = max(len(x) - 2, 1)
    if hist.source is Source.SAMPLED:
        # counts weights are inverse variances of ln(count); inflate by overdispersion
        chi2 = float(resid @ (w * resid)) / dof
        cov = np.linalg.inv(A) * max(chi2, 1.0)
    else:
        cov = np.linalg.inv(A) * float(resid @ (w * resid)) / dof
    slope = coef[1]
    if slope >= 0:
        raise FitError("distribution does not decay away from n0")
    ell = -2.0 / slope
    stderr = 2.0 / slope**2 * math.sqrt(max(cov[1, 1], 0.0))
    ybar = np.average(y, weights=w)
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    r2 = 1.0 - float(np.sum(w * resid**2)) / ss_tot if ss_tot > 0 else 1.0
    N = hist.edges[-1] - hist.edges[0]
    return LocalizationFit(
        ell=float(ell), n0=float(n0), stderr=float(stderr),
        fit_range=(float(x.min()), float(x.max())), r2=r2, bins_used=int(keep.sum()),
        amplitude=float(math.exp(coef[0])), localized=bool(ell < localized_fraction * N),
    )


def time_average_distribution(trajectory: np.ndarray, window: tuple[int, int]) -> np.ndarray:
    """Mean of ``|psi_hat(n)|**2`` over ``t = window[0]..window[1]`` (inclusive).

    ``trajectory`` holds momentum amplitudes with time along the first axis.
    """
    a, b = window
    if b < a:
        raise ValueError("empty averaging window")
    if a < 0 or b >= len(trajectory):
        raise ValueError(f"window {window} outside trajectory of length {len(trajectory)}")
    return np.mean(np.abs(trajectory[a : b + 1]) ** 2, axis=0)


def msd_series(trajectory: np.ndarray, n0: float | None = None) -> np.ndarray:
    """``<(n - n0)**2>`` per step from momentum amplitudes (time along axis 0).

    With ``n0=None`` the variance of each distribution is returned.
    """
    probs = np.abs(np.asarray(trajectory)) ** 2
    if n0 is None:
        return momentum_moments(probs)[1]
    n = momentum_grid(probs.shape[-1]).astype(float)
    return probs @ (n - n0) ** 2


def sampled_variance(record: ShotRecord) -> tuple[float, float]:
    """Sample variance of the outcomes and its delete-one jackknife error."""
    x = record.outcomes.astype(float)
    m = len(x)
    if m < 2:
        return 0.0, math.inf
    s1, s2 = x.sum(), (x * x).sum()
    var = s2 / m - (s1 / m) ** 2
    # variance of each leave-one-out sample
    mean_i = (s1 - x) / (m - 1)
    var_i = (s2 - x * x) / (m - 1) - mean_i**2
    jk = math.sqrt((m - 1) / m * float(np.sum((var_i - var_i.mean()) ** 2)))
    return float(var), jk


def detect_break_time(msd: np.ndarray, D_n: float, ratio: float = 0.8, sustain: int = 5) -> int | None:
    """First ``t`` after which ``msd`` stays below ``ratio * D_n * t`` for ``sustain`` steps."""
    msd = np.asarray(msd)
    t = np.arange(len(msd))
    below = (msd < ratio * D_n * t) & (t > 0)
    run = 0
    for i, b in enumerate(below):
        run = run + 1 if b else 0
        if run == sustain:
            return i - sustain + 1
    return None


# -- frequency estimation ------------------------------------------------------

def dominant_frequency(series, pad: int = 8, min_snr: float = 5.0) -> tuple[float, float, float]:
    """Angular frequency (radians per sample) of the strongest spectral line.

    Mean removed, Hann window, zero padding by ``pad``, three-point
    parabolic interpolation of the log power around the peak.  Complex
    series use the two-sided spectrum and return ``|omega|``.  Returns
    ``(omega, amplitude, resolution)``.
    """
    x = np.asarray(series)
    n = len(x)
    if n < 8:
        raise ValueError("series too short for a spectral estimate")
    x = x - x.mean()
    win = np.hanning(n)
    nfft = pad * n
    spectrum = np.fft.fft(x * win, nfft)
    power = np.abs(spectrum) ** 2
    freqs = 2 * np.pi * np.fft.fftfreq(nfft)
    if not np.iscomplexobj(x):
        half = nfft // 2 + 1
        power, freqs = power[:half], np.abs(freqs[:half])
    # skip the DC lobe (Hann main lobe is 2 bins wide before padding)
    power = power.copy()
    power[np.abs(freqs) < 2 * np.pi * 1.5 / n] = 0.0
    i = int(np.argmax(power))
    peak = power[i]
    noise = np.median(power[power > 0]) if np.any(power > 0) else 0.0
    if peak == 0.0 or peak < min_snr * noise:
        raise NoSignalError("no spectral line above the noise floor")
    df = 2 * np.pi / nfft
    offset = 0.0
    if 0 < i < len(power) - 1 and power[i - 1] > 0 and power[i + 1] > 0:
        l, c, r = np.log(power[i - 1 : i + 2])
        denom = l - 2 * c + r
        if denom < 0:
            offset = 0.5 * (l - r) / denom
    # fftfreq is increasing in the index on both halves
    omega = abs(freqs[i] + offset * df)
    amplitude = 2 * math.sqrt(peak) / win.sum()
    return float(omega), float(amplitude), float(2 * np.pi / n)


def estimate_frequency(series, method: str = "center-of-mass", pad: int = 8) -> FrequencyEstimate:
    """Island rotation frequency from a time series sampled once per iteration.

    ``method="center-of-mass"``: ``series`` follows the packet center, e.g.
    ``<exp(1j*theta)>(t)``; its dominant line is ``omega``.
    ``method="variance"``: ``series`` is ``<(dn)**2>(t)``; a breathing
    ellipse oscillates at ``2*omega``, so the peak is halved and flagged.
    """
    omega, amp, res = dominant_frequency(series, pad=pad)
    if method == "center-of-mass":
        return FrequencyEstimate(omega, amp, "CenterOfMassReturn", res / 2)
    if method == "variance":
        return FrequencyEstimate(omega / 2, amp, "VarianceOscillation", res / 4, harmonic=2,
                                 flags=["halved: variance oscillates at twice the rotation frequency"])
    raise ValueError(f"unknown method {method!r}")


def center_of_mass_series(trajectory_theta: np.ndarray) -> np.ndarray:
    """``<exp(1j*theta)>(t)`` from theta-representation amplitudes (time along axis 0)."""
    N = trajectory_theta.shape[-1]
    phase = np.exp(2j * np.pi * np.arange(N) / N)
    return (np.abs(trajectory_theta) ** 2) @ phase


def chi_square_same_distribution(counts_a, counts_b) -> float:
    """p-value that two count vectors come from the same distribution."""
    table = np.vstack([counts_a, counts_b]).astype(float)
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        return 1.0
    return float(stats.chi2_contingency(table)[1])


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
