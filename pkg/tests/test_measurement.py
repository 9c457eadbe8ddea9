import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sawtooth import measurement as ms
from sawtooth.params import MapParams
from sawtooth.quantum import Basis, Propagator, StateVector, init_momentum_eigenstate, momentum_grid


def _profile(N, ell, n0=0, background=0.0):
    n = momentum_grid(N)
    w = np.exp(-2 * np.abs(n - n0) / ell) + background
    return w / w.sum()


@pytest.fixture(scope="module")
def localized_trajectory():
    k = math.sqrt(3)
    p = MapParams(k=k, T=math.sqrt(2) / k, n_q=6)
    return p, Propagator(p).trajectory(init_momentum_eigenstate(0, p), 300)


def test_eigenstate_shots_all_equal():
    p = MapParams(k=1.0, T=1.0, n_q=5)
    rec = ms.sample_momentum(init_momentum_eigenstate(3, p), 500, seed=1)
    assert rec.shots == 500
    assert np.all(rec.outcomes == 3)


def test_uniform_shots_within_multinomial_bounds():
    N, shots = 16, 100_000
    rec = ms.sample_momentum(np.full(N, 1 / N), shots, seed=2)
    counts = np.bincount(rec.outcomes + N // 2, minlength=N)
    sigma = math.sqrt(shots * (1 / N) * (1 - 1 / N))
    assert np.all(np.abs(counts - shots / N) < 4 * sigma)


def test_sampling_total_variation():
    p = _profile(64, 8.0)
    shots = 100_000
    hist = ms.histogram(ms.sample_momentum(p, shots, seed=3))
    assert ms.total_variation(hist.prob, p) < 5 / math.sqrt(shots)


def test_sampling_is_seeded():
    p = _profile(64, 8.0)
    a = ms.sample_momentum(p, 100, seed=7).outcomes
    b = ms.sample_momentum(p, 100, seed=7).outcomes
    c = ms.sample_momentum(p, 100, seed=8).outcomes
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_zero_shots_rejected():
    with pytest.raises(ValueError):
        ms.sample_momentum(_profile(8, 2.0), 0)


def test_unnormalized_input_rejected():
    with pytest.raises(ValueError):
        ms.sample_momentum(np.ones(8), 10)


def test_truncation_bounds():
    with pytest.raises(ValueError):
        ms.sample_momentum(_profile(8, 2.0), 10, truncate_to_m_qubits=4)


def test_truncated_sampling_matches_binned_full_sampling():
    N, m, shots = 256, 4, 100_000
    p = _profile(N, 12.0)
    trunc = ms.sample_momentum(p, shots, seed=10, truncate_to_m_qubits=m)
    full = ms.sample_momentum(p, shots, seed=11)
    assert trunc.bin_width == N >> m
    assert np.all((trunc.outcomes - -N // 2) % (N >> m) == 0)
    a = ms.histogram(trunc, N >> m)
    b = ms.histogram(full, N >> m)
    assert ms.chi_square_same_distribution(a.counts, b.counts) > 1e-3


def test_truncated_histogram_needs_compatible_width():
    rec = ms.sample_momentum(_profile(64, 4.0), 100, seed=1, truncate_to_m_qubits=3)
    with pytest.raises(ValueError):
        ms.histogram(rec, 4)


def test_spawned_seeds_are_independent():
    seeds = ms.spawn_seeds(12345, 3)
    draws = [np.random.default_rng(s).integers(0, 2**62) for s in seeds]
    assert len(set(draws)) == 3
    again = [np.random.default_rng(s).integers(0, 2**62) for s in ms.spawn_seeds(12345, 3)]
    assert draws == again


def test_histogram_single_bin_and_delta():
    p = MapParams(k=1.0, T=1.0, n_q=4)
    psi = init_momentum_eigenstate(-3, p)
    h = ms.histogram(psi, 16)
    assert len(h.prob) == 1 and h.prob[0] == pytest.approx(1.0)
    h = ms.histogram(psi, 1)
    assert h.prob[np.argmax(h.prob)] == 1.0 and h.centers[np.argmax(h.prob)] == -3
    assert h.source is ms.Source.EXACT


def test_histogram_width_errors():
    with pytest.raises(ValueError):
        ms.histogram(_profile(8, 2.0), 9)
    with pytest.raises(ValueError):
        ms.histogram(_profile(8, 2.0), 0)


@settings(max_examples=25, deadline=None)
@given(n_q=st.integers(1, 9), dn_exp=st.integers(0, 9), seed=st.integers(0, 1000))
def test_histogram_conserves_probability(n_q, dn_exp, seed):
    N = 2**n_q
    dn = min(2**dn_exp, N)
    p = np.random.default_rng(seed).random(N)
    p /= p.sum()
    h = ms.histogram(p, dn)
    assert abs(h.prob.sum() - 1) < 1e-12
    assert h.edges[0] == -N // 2 and h.edges[-1] == N // 2


def test_break_time_prediction():
    assert ms.predict_break_time(math.sqrt(3)) == pytest.approx((math.pi**2,) * 3)
    assert ms.predict_break_time(0.0) == (0.0, 0.0, 0.0)
    assert ms.predict_break_time(3.0)[1] == pytest.approx(3 * math.pi**2)
    assert ms.predict_break_time(MapParams(k=3.0, T=0.1))[1] == pytest.approx(29.6088, rel=1e-4)


def test_default_bin_width():
    assert ms.default_bin_width(MapParams(k=math.sqrt(3), T=0.8)) == 2
    assert ms.default_bin_width(MapParams(k=0.1, T=0.8)) == 1


def test_fit_recovers_own_model():
    fit = ms.fit_localization(ms.histogram(_profile(256, 12.0)))
    assert fit.ell == pytest.approx(12.0, abs=1e-9)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.localized


def test_fit_off_center_and_coarse():
    fit = ms.fit_localization(ms.histogram(_profile(512, 20.0, n0=10), 1), n0=10)
    assert fit.ell == pytest.approx(20.0, rel=1e-9)
    fit = ms.fit_localization(ms.histogram(_profile(512, 20.0), 4))
    assert fit.ell == pytest.approx(20.0, rel=0.02)


def test_fit_with_background_and_floor():
    fit = ms.fit_localization(ms.histogram(_profile(1024, 12.0, background=1e-8)), floor=1e-7)
    assert fit.ell == pytest.approx(12.0, rel=0.05)


def test_fit_one_sided():
    p = _profile(256, 12.0)
    p[momentum_grid(256) < 0] = 0
    fit = ms.fit_localization(ms.histogram(p / p.sum()), mode="one-sided")
    assert fit.ell == pytest.approx(12.0, rel=1e-9)


def test_fit_flags_system_size_limited():
    fit = ms.fit_localization(ms.histogram(_profile(32, 40.0)))
    assert not fit.localized


def test_fit_undetermined():
    p = np.zeros(16)
    p[8] = 1.0
    with pytest.raises(ms.FitError):
        ms.fit_localization(ms.histogram(p))
    with pytest.raises(ms.FitError):
        ms.fit_localization(ms.histogram(np.full(16, 1 / 16)))
    with pytest.raises(ValueError):
        ms.fit_localization(ms.histogram(_profile(16, 2.0)), mode="sideways")


def test_exact_fit_agrees_with_large_shot_limit():
    p = _profile(256, 12.0) * (1 + 0.3 * np.cos(momentum_grid(256)))
    p /= p.sum()
    exact = ms.fit_localization(ms.histogram(p, 4))
    sampled = ms.fit_localization(ms.histogram(ms.sample_momentum(p, 10**6, seed=4), 4))
    assert abs(exact.ell - sampled.ell) < 3 * math.hypot(exact.stderr, sampled.stderr) + 1e-3 * exact.ell


def test_quantum_profile_is_localized(localized_trajectory):
    params, tr = localized_trajectory
    early = ms.fit_localization(ms.histogram(ms.time_average_distribution(tr, (10, 20)), 2))
    late = ms.fit_localization(ms.histogram(ms.time_average_distribution(tr, (290, 300)), 2))
    assert 12 * 0.7 <= early.ell <= 12 * 1.3
    assert abs(late.ell - early.ell) / early.ell < 0.25


def test_time_average_window(localized_trajectory):
    _, tr = localized_trajectory
    np.testing.assert_allclose(ms.time_average_distribution(tr, (7, 7)), np.abs(tr[7]) ** 2)
    with pytest.raises(ValueError):
        ms.time_average_distribution(tr, (5, 4))
    with pytest.raises(ValueError):
        ms.time_average_distribution(tr, (0, len(tr)))


def test_time_average_smooths_fluctuations(localized_trajectory):
    _, tr = localized_trajectory
    snaps = np.abs(tr[50:250]) ** 2
    avgs = np.array([snaps[i : i + 10].mean(axis=0) for i in range(0, 190, 10)])
    assert avgs.var(axis=0).sum() < snaps.var(axis=0).sum()


def test_msd_of_static_eigenstate():
    p = MapParams(k=0.0, T=1.0, n_q=5)
    tr = Propagator(p).trajectory(init_momentum_eigenstate(2, p), 10)
    assert np.abs(ms.msd_series(tr)).max() < 1e-12
    assert np.abs(ms.msd_series(tr, n0=2)).max() < 1e-12


def test_msd_early_growth_and_saturation(localized_trajectory):
    _, tr = localized_trajectory
    msd = ms.msd_series(tr, n0=0)
    t = np.arange(1, 6)
    slope = t @ msd[1:6] / (t @ t)
    assert slope == pytest.approx(math.pi**2, rel=0.5)
    assert msd[200:].mean() < 0.5 * math.pi**2 * 200
    tb = ms.detect_break_time(msd, math.pi**2)
    assert tb is not None and 2 <= tb <= 30


def test_sampled_variance_converges():
    p = _profile(256, 12.0)
    n = momentum_grid(256)
    exact = p @ n**2 - (p @ n) ** 2
    errs = []
    for shots in (10**3, 10**4, 10**5):
        var, jk = ms.sampled_variance(ms.sample_momentum(p, shots, seed=shots))
        assert abs(var - exact) < 5 * jk
        errs.append(jk)
    assert errs[0] > errs[1] > errs[2]


def test_detect_break_time_linear_series_never_breaks():
    assert ms.detect_break_time(2.0 * np.arange(50), 2.0) is None


def test_dominant_frequency_synthetic():
    t = np.arange(400)
    for w in (0.3176, 1.1, math.pi / 2):
        est = ms.estimate_frequency(np.cos(w * t), "center-of-mass")
        assert est.omega == pytest.approx(w, abs=2 * math.pi / 400)
    for w in (0.5, -0.5):
        assert ms.estimate_frequency(np.exp(1j * w * t)).omega == pytest.approx(0.5, abs=1e-4)


def test_variance_method_halves():
    t = np.arange(400)
    est = ms.estimate_frequency(3 + np.cos(2 * 0.3 * t), "variance")
    assert est.omega == pytest.approx(0.3, abs=1e-3)
    assert est.harmonic == 2 and est.flags


def test_frequency_errors():
    with pytest.raises(ms.NoSignalError):
        ms.estimate_frequency(np.ones(100))
    with pytest.raises(ValueError):
        ms.estimate_frequency(np.arange(4.0))
    with pytest.raises(ValueError):
        ms.estimate_frequency(np.cos(np.arange(100)), "bogus")


def test_center_of_mass_of_theta_eigenstate():
    N = 16
    tr = np.zeros((3, N), complex)
    tr[:, 4] = 1.0
    np.testing.assert_allclose(ms.center_of_mass_series(tr), np.exp(2j * np.pi * 4 / N))


def test_chi_square_distinguishes():
    rng = np.random.default_rng(0)
    a = rng.multinomial(10_000, [0.5, 0.3, 0.2])
    b = rng.multinomial(10_000, [0.3, 0.3, 0.4])
    assert ms.chi_square_same_distribution(a, b) < 1e-6


def test_state_and_vector_sources_agree():
    p = MapParams(k=1.0, T=1.0, n_q=5)
    v = np.random.default_rng(1).normal(size=32) + 0j
    psi = StateVector(v / np.linalg.norm(v), Basis.THETA, p)
    np.testing.assert_allclose(ms.histogram(psi, 4).prob, ms.histogram(ms.momentum_distribution(psi), 4).prob)
