import math
import sys

import numpy as np
import pytest

from sawtooth.params import MapParams
from sawtooth.quantum import Basis, StateVector


def _random_state(params, seed=0, basis=Basis.THETA):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=params.N) + 1j * rng.normal(size=params.N)
    return StateVector(v / np.linalg.norm(v), basis, params)


@pytest.fixture
def random_state():
    return _random_state


@pytest.fixture
def localization_params():
    # cylinder localization setup: n_q = 6, k = sqrt(3), K = sqrt(2)
    k = math.sqrt(3)
    return MapParams(k=k, T=math.sqrt(2) / k, n_q=6)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[number])
