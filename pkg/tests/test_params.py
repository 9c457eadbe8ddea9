import math

import pytest

from sawtooth.params import MapParams, ParameterError


def test_K_is_product():
    p = MapParams(k=3.0, T=0.25)
    assert p.K == 0.75
    assert p.hbar_eff == 0.25


def test_torus_constructor_sets_T():
    p = MapParams.on_torus(K=-0.1, L=1, n_q=8)
    assert p.N == 256
    assert p.T == pytest.approx(2 * math.pi / 256)
    assert p.K == pytest.approx(-0.1)
    assert p.p_window == pytest.approx((-math.pi, math.pi))


def test_torus_rejects_non_integer_cells():
    with pytest.raises(ParameterError):
        MapParams(k=1.0, T=1.0, n_q=3, L=1)


@pytest.mark.parametrize("n_q", [0, -1, 2.5])
def test_bad_register(n_q):
    with pytest.raises(ParameterError):
        MapParams(k=1.0, T=1.0, n_q=n_q)


def test_cylinder_window_from_register():
    p = MapParams(k=1.0, T=0.5, n_q=4)
    assert p.p_window == (-4.0, 4.0)
    assert not p.torus


def test_missing_register():
    with pytest.raises(ParameterError):
        MapParams(k=1.0, T=1.0).N
