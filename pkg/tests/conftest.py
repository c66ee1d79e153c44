import numpy as np
import pytest

from entrokit.core import entr
from entrokit.polyapprox import ChebApprox, remez

_approx_cache: dict[tuple, ChebApprox] = {}


@pytest.fixture(scope="session")
def phi_approx():
    """Session-cached best approximations of the entropy integrand on [0, 1]."""

    def get(degree: int) -> ChebApprox:
        key = ("phi", degree)
        if key not in _approx_cache:
            _approx_cache[key] = remez(entr, degree, (0.0, 1.0))
        return _approx_cache[key]

    return get


@pytest.fixture(scope="session")
def log_approx():
    """Session-cached best approximations of log on [eta, 1]."""

    def get(degree: int, eta: float) -> ChebApprox:
        key = ("log", degree, eta)
        if key not in _approx_cache:
            _approx_cache[key] = remez(np.log, degree, (eta, 1.0))
        return _approx_cache[key]

    return get
