import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sawtooth.params import MapParams
from sawtooth.quantum import (
    Basis,
    BasisError,
    Propagator,
    StateVector,
    apply_free,
    apply_kick,
    coherent_widths,
    dft_matrix,
    evolve_oracle,
    floquet_matrix,
    init_coherent_state,
    init_momentum_eigenstate,
    moments,
    momentum_grid,
    theta_grid,
    to_momentum,
    to_theta,
)


def test_grids():
    assert list(momentum_grid(4)) == [-2, -1, 0, 1]
    assert theta_grid(4)[-1] == pytest.approx(1.5 * math.pi)


def test_momentum_eigenstate():
    p = MapParams(k=1.0, T=1.0, n_q=2)
    psi = init_momentum_eigenstate(0, p)
    assert list(psi.amplitudes) == [0, 0, 1, 0]
    assert psi.norm() == 1.0
    m = moments(psi)
    assert m.n_mean == 0 and m.n_var == 0
    psi = init_momentum_eigenstate(-2, p)
    assert moments(psi).n_mean == -2
    with pytest.raises(ValueError):
        init_momentum_eigenstate(2, p)


def test_uniform_theta_state_is_zero_momentum():
    p = MapParams(k=1.0, T=1.0, n_q=5)
    psi = StateVector(np.full(32, 1 / math.sqrt(32)), Basis.THETA, p)
    np.testing.assert_allclose(to_momentum(psi).amplitudes, init_momentum_eigenstate(0, p).amplitudes, atol=1e-15)


def test_momentum_eigenstate_is_plane_wave():
    p = MapParams(k=1.0, T=1.0, n_q=4)
    psi = to_theta(init_momentum_eigenstate(3, p))
    np.testing.assert_allclose(psi.amplitudes, np.exp(3j * theta_grid(16)) / 4, atol=1e-15)


def test_fft_matches_dense_kernel(random_state):
    p = MapParams(k=1.0, T=1.0, n_q=5)
    psi = random_state(p, 1)
    np.testing.assert_allclose(to_momentum(psi).amplitudes, dft_matrix(32) @ psi.amplitudes, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(n_q=st.integers(1, 10), seed=st.integers(0, 2**31))
def test_round_trip(n_q, seed):
    p = MapParams(k=1.0, T=1.0, n_q=n_q)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=p.N) + 1j * rng.normal(size=p.N)
    psi = StateVector(v / np.linalg.norm(v), Basis.THETA, p)
    back = to_theta(to_momentum(psi))
    assert np.abs(back.amplitudes - psi.amplitudes).max() < 1e-13
    assert abs(to_momentum(psi).norm() - 1) < 1e-13


def test_wrong_basis_errors():
    p = MapParams(k=1.0, T=1.0, n_q=3)
    m = init_momentum_eigenstate(0, p)
    with pytest.raises(BasisError):
        apply_kick(m)
    with pytest.raises(BasisError):
        to_momentum(m)
    with pytest.raises(BasisError):
        apply_free(to_theta(m))
    with pytest.raises(BasisError):
        to_theta(to_theta(m))


def test_kick(random_state):
    psi = random_state(MapParams(k=0.0, T=1.0, n_q=4))
    np.testing.assert_array_equal(apply_kick(psi).amplitudes, psi.amplitudes)
    psi = random_state(MapParams(k=2.3, T=1.0, n_q=4))
    kicked = apply_kick(psi)
    np.testing.assert_allclose(np.abs(kicked.amplitudes), np.abs(psi.amplitudes), atol=1e-15)
    # theta_8 = pi on a 16-point grid
    assert kicked.amplitudes[8] == psi.amplitudes[8]


def test_free(random_state):
    psi = random_state(MapParams(k=1.0, T=0.0, n_q=4), basis=Basis.MOMENTUM)
    np.testing.assert_array_equal(apply_free(psi).amplitudes, psi.amplitudes)
    psi = random_state(MapParams(k=1.0, T=0.9, n_q=4), basis=Basis.MOMENTUM)
    free = apply_free(psi)
    np.testing.assert_allclose(np.abs(free.amplitudes), np.abs(psi.amplitudes), atol=1e-15)
    assert free.amplitudes[8] == psi.amplitudes[8]


def test_oracle_identities(random_state):
    p = MapParams(k=1.7, T=0.4, n_q=5)
    psi = random_state(p, 2)
    np.testing.assert_array_equal(evolve_oracle(psi, p, 0).amplitudes, psi.amplitudes)
    p0 = MapParams(k=0.0, T=0.0, n_q=5)
    np.testing.assert_allclose(evolve_oracle(psi, p0, 7).amplitudes, psi.amplitudes, atol=1e-14)
    with pytest.raises(ValueError):
        evolve_oracle(psi, p, -1)


@pytest.mark.parametrize("n_q", [1, 2, 3, 4, 5, 6])
def test_oracle_matches_dense_floquet_matrix(random_state, n_q):
    p = MapParams(k=math.sqrt(3), T=0.8, n_q=n_q)
    psi = random_state(p, n_q)
    U = floquet_matrix(p)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(p.N), atol=1e-12)
    dense = np.linalg.matrix_power(U, 10) @ psi.amplitudes
    assert np.abs(evolve_oracle(psi, p, 10).amplitudes - dense).max() < 1e-10


def test_momentum_variant_is_same_map(random_state):
    p = MapParams(k=1.1, T=0.6, n_q=6)
    psi = random_state(p, 3)
    a = evolve_oracle(psi, p, 5)
    b = evolve_oracle(to_momentum(psi), p, 5)
    assert b.basis is Basis.MOMENTUM
    np.testing.assert_allclose(to_momentum(a).amplitudes, b.amplitudes, atol=1e-12)


def test_unitarity_per_iteration(random_state):
    for n_q in (4, 8, 12):
        p = MapParams(k=math.sqrt(3), T=0.8, n_q=n_q)
        prop = Propagator(p)
        a = random_state(p, n_q).amplitudes
        for _ in range(20):
            b = prop.step_theta(a)
            assert abs(np.linalg.norm(b) - np.linalg.norm(a)) < 1e-13
            a = b


def test_trajectory_bases_agree(random_state):
    p = MapParams(k=1.1, T=0.6, n_q=5)
    psi = random_state(p, 4)
    prop = Propagator(p)
    th = prop.trajectory(psi, 6, Basis.THETA)
    mo = prop.trajectory(psi, 6, Basis.MOMENTUM)
    np.testing.assert_allclose(to_momentum(StateVector(th[6], Basis.THETA, p)).amplitudes, mo[6], atol=1e-13)


def test_moments_uniform_four_levels():
    p = MapParams(k=1.0, T=1.0, n_q=2)
    psi = StateVector(np.full(4, 0.5), Basis.MOMENTUM, p)
    m = moments(psi)
    assert m.n_mean == pytest.approx(-0.5)
    assert m.n_var == pytest.approx(1.25)


def test_circular_theta_mean_across_cut():
    p = MapParams.on_torus(-0.1, 1, 8)
    psi = init_coherent_state(0.0, 0.0, 1.0, p)
    m = moments(psi)
    # circular mean of a packet sitting on theta = 0 is 0 (or 2*pi), not pi
    assert min(m.theta_mean, 2 * math.pi - m.theta_mean) < 1e-10
    dth, _ = coherent_widths(1.0, p)
    assert m.theta_var == pytest.approx(dth**2, rel=1e-6)


def test_coherent_state_norm_and_centre():
    p = MapParams.on_torus(-0.1, 1, 10)
    psi = init_coherent_state(2.0, 0.7, 1.0, p)
    assert psi.norm() == pytest.approx(1.0, abs=1e-14)
    m = moments(psi)
    assert m.theta_mean == pytest.approx(2.0, abs=1e-6)
    assert p.T * m.n_mean == pytest.approx(0.7, abs=1e-6)


def test_coherent_state_minimum_uncertainty():
    p = MapParams.on_torus(-0.1, 1, 10)
    for s in (0.5, 1.0, 2.0):
        m = moments(init_coherent_state(math.pi, 0.3, s, p))
        dp2 = p.T**2 * m.n_var
        assert dp2 * m.theta_var == pytest.approx(p.T**2 / 4, rel=1e-6)
        assert math.sqrt(dp2 / m.theta_var) == pytest.approx(s, rel=1e-6)


def test_coherent_overlap_is_gaussian_in_displacement():
    p = MapParams.on_torus(-0.1, 1, 6)
    dth, dp = coherent_widths(1.0, p)
    ref = init_coherent_state(math.pi, 0.0, 1.0, p)
    N = p.N
    # displacements that are whole grid steps in theta and whole levels in p
    for j in range(0, 4):
        for m in range(0, 4):
            d_theta, d_p = 2 * math.pi * j / N, p.T * m
            other = init_coherent_state(math.pi + d_theta, d_p, 1.0, p)
            brute = abs(sum(np.conj(ref.amplitudes[i]) * other.amplitudes[i] for i in range(N))) ** 2
            expected = math.exp(-(d_theta**2) / (4 * dth**2) - d_p**2 / (4 * dp**2))
            assert brute == pytest.approx(expected, rel=1e-8, abs=1e-14)


def test_coherent_rejects_bad_squeezing():
    with pytest.raises(ValueError):
        init_coherent_state(1.0, 0.0, 0.0, MapParams.on_torus(-0.1, 1, 4))


def test_classical_correspondence_before_break_time():
    k = math.sqrt(3)
    p = MapParams(k=k, T=math.sqrt(2) / k, n_q=10)
    tr = Propagator(p).trajectory(init_momentum_eigenstate(0, p), 5)
    var = np.array([moments(StateVector(a, Basis.MOMENTUM, p)).n_var for a in tr])
    t = np.arange(1, 6)
    rate = t @ var[1:] / (t @ t)
    assert rate == pytest.approx(math.pi**2 / 3 * k * k, rel=0.3)
