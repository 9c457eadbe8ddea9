import math
from pathlib import Path

import numpy as np
import pytest

from sawtooth import classical as cm
from sawtooth import husimi as hm
from sawtooth.husimi import HusimiProjector, husimi, time_averaged_husimi
from sawtooth.params import MapParams
from sawtooth.quantum import (
    Basis,
    Propagator,
    StateVector,
    init_coherent_state,
    init_momentum_eigenstate,
    theta_grid,
    to_theta,
)

GOLDEN = Path(__file__).parent / "data" / "husimi_island_golden.npy"


def test_coherent_state_peaks_at_its_centre():
    p = MapParams.on_torus(-0.1, 1, 8)
    h = husimi(init_coherent_state(math.pi, 0.0, 1.0, p), (64, 64))
    assert h.argmax() == pytest.approx((math.pi, 0.0))


def test_momentum_eigenstate_rows_are_uniform():
    p = MapParams.on_torus(-0.1, 1, 8)
    h = husimi(init_momentum_eigenstate(5, p), (64, 64))
    spread = h.values.max(axis=1) - h.values.min(axis=1)
    assert spread.max() < 1e-10
    assert h.argmax()[1] == pytest.approx(5 * p.T, abs=2 * math.pi / 64)


@pytest.mark.parametrize("n_q", [6, 8])
def test_nonnegative_and_normalized(random_state, n_q):
    p = MapParams.on_torus(-0.1, 1, n_q)
    h = husimi(random_state(p, n_q), (64, 64))
    assert h.values.min() >= 0
    assert 0.98 <= h.total() <= 1.02


def test_squeezing_keeps_normalization():
    p = MapParams.on_torus(-0.1, 1, 7)
    psi = init_coherent_state(1.0, 0.5, 1.0, p)
    for s in (0.5, 2.0):
        assert husimi(psi, (64, 64), s).total() == pytest.approx(1.0, abs=0.02)


def test_translation_by_one_level_shifts_one_row():
    # on the L=1 torus with N rows, one row is exactly one momentum level T
    p = MapParams.on_torus(-0.1, 1, 6)
    psi = init_coherent_state(2.0, 0.5, 1.0, p)
    shifted = StateVector(psi.amplitudes * np.exp(1j * theta_grid(64)), Basis.THETA, p)
    a = husimi(psi, (64, 64)).values
    b = husimi(shifted, (64, 64)).values
    assert np.abs(np.roll(a, 1, axis=0) - b).max() < 1e-12


def test_coarse_grid_rejected():
    p = MapParams.on_torus(-0.1, 1, 6)
    with pytest.raises(ValueError):
        husimi(init_momentum_eigenstate(0, p), (4, 64))


def test_momentum_input_accepted():
    p = MapParams.on_torus(-0.1, 1, 6)
    psi = init_momentum_eigenstate(2, p)
    a = husimi(psi, (16, 16)).values
    b = husimi(to_theta(psi), (16, 16)).values
    np.testing.assert_allclose(a, b, atol=1e-15)


def test_blocked_templates_match_cached(monkeypatch, random_state):
    p = MapParams.on_torus(-0.1, 1, 6)
    psi = random_state(p, 3)
    full = HusimiProjector(p, (32, 32))(psi).values
    monkeypatch.setattr(hm, "_CACHE_LIMIT", 64 * 32 * 5)
    blocked = HusimiProjector(p, (32, 32))
    assert blocked._bra is None
    np.testing.assert_allclose(blocked(psi).values, full, atol=1e-15)


def test_time_average_identities():
    p = MapParams.on_torus(-0.1, 1, 6)
    tr = Propagator(p).trajectory(init_coherent_state(2.0, 0.3, 1.0, p), 5, Basis.THETA)
    single = time_averaged_husimi(tr, p, (3, 3), (16, 16)).values
    np.testing.assert_allclose(single, husimi(StateVector(tr[3], Basis.THETA, p), (16, 16)).values, atol=1e-15)
    with pytest.raises(ValueError):
        time_averaged_husimi(tr, p, (3, 2), (16, 16))


def test_stationary_state_average_equals_snapshot():
    # at k = 0, T = 0 nothing moves
    p = MapParams(k=0.0, T=2 * math.pi / 64, n_q=6)
    stat = MapParams(k=0.0, T=0.0, n_q=6)
    psi = init_coherent_state(2.0, 0.3, 1.0, p)
    tr = Propagator(stat).trajectory(psi, 10, Basis.THETA)
    avg = time_averaged_husimi(tr, p, (0, 10), (16, 16)).values
    assert np.abs(avg - husimi(psi, (16, 16)).values).max() < 1e-12


def test_island_orbit_fills_annulus():
    p = MapParams.on_torus(-0.1, 1, 8)
    x0 = 1.0
    psi = init_coherent_state(math.pi + x0, 0.0, 1.0, p)
    period = round(2 * math.pi / cm.island_rotation_frequency(p))
    tr = Propagator(p).trajectory(psi, period, Basis.THETA)
    h = time_averaged_husimi(tr, p, (0, period - 1), (64, 64))
    s = cm.ClassicalState(0.0, math.pi + x0)
    vmax = h.values.max()
    for _ in range(period):
        col = round(s.theta / (2 * math.pi) * 64) % 64
        row = round((p.T * s.n + math.pi) / (2 * math.pi) * 64) % 64
        assert h.values[row, col] > 0.2 * vmax
        s = cm.step(s, p)
    # the island centre is left nearly empty
    assert h.values[32, 32] < 0.1 * vmax


def test_golden_island_picture():
    p = MapParams.on_torus(-0.1, 1, 8)
    tr = Propagator(p).trajectory(init_momentum_eigenstate(0, p), 20, Basis.THETA)
    h = time_averaged_husimi(tr, p, (1, 20), (64, 64))
    assert np.abs(h.values - np.load(GOLDEN)).max() < 1e-9
