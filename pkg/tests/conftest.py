import numpy as np
import pytest

from engines.distributions import BetaSym, Normal, Pareto, ScaledT, Uniform01

FINITE_VARIANCE_FAMILIES = [
    Uniform01(),
    Normal(0.0, 1.0),
    Normal(3.0, 2.0),
    Pareto(1.0, 3.0),
    BetaSym(2.0),
    BetaSym(0.5),
    ScaledT(5.0, 1.0, 0.0),
]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=FINITE_VARIANCE_FAMILIES, ids=lambda d: d.literal)
def family(request):
    return request.param
