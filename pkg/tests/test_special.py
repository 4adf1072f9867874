import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from engines.special import (
    beta_cdf,
    beta_density,
    check_indices,
    check_width,
    order_stat_cdf,
    order_stat_density,
    psi,
    ptilde,
    theta_b,
)
from errors import InvalidParameterError

GRID = np.linspace(0.0, 1.0, 1001)


def test_beta_cdf_known_values():
    assert beta_cdf(0.5, 2, 2) == pytest.approx(0.5, abs=1e-14)
    assert beta_cdf(0.3, 1, 1) == pytest.approx(0.3, abs=1e-14)
    assert beta_cdf(0.25, 2, 2) == pytest.approx(0.15625, abs=1e-14)
    assert beta_cdf(0.4, 1, 2) == pytest.approx(1 - 0.6 ** 2, abs=1e-14)
    assert beta_cdf(0.0, 3, 4) == 0.0
    assert beta_cdf(1.0, 3, 4) == 1.0


@given(x=st.floats(0.0, 1.0), a=st.floats(0.1, 50.0), b=st.floats(0.1, 50.0))
def test_beta_cdf_reflection(x, a, b):
    assert beta_cdf(x, a, b) == pytest.approx(1.0 - beta_cdf(1.0 - x, b, a), abs=1e-12)


@pytest.mark.parametrize("x, a, b", [(-0.1, 1, 1), (1.1, 1, 1), (0.5, 0, 1), (0.5, 1, -2), (float("nan"), 1, 1)])
def test_beta_cdf_rejects_bad_domain(x, a, b):
    with pytest.raises(InvalidParameterError):
        beta_cdf(x, a, b)


def test_beta_density_matches_closed_form():
    assert beta_density(0.25, 2, 2) == pytest.approx(6 * 0.25 * 0.75)


def test_order_statistic_laws():
    x = np.array([0.1, 0.4, 0.8])
    np.testing.assert_allclose(order_stat_cdf(x, 1, 2), 1 - (1 - x) ** 2, atol=1e-14)
    np.testing.assert_allclose(order_stat_cdf(x, 2, 2), x ** 2, atol=1e-14)
    np.testing.assert_allclose(order_stat_density(x, 2, 3), 6 * x * (1 - x), atol=1e-12)
    with pytest.raises(InvalidParameterError):
        order_stat_cdf(0.5, 4, 3)


# ── Ψ recursion ─────────────────────────────────────────────────────────────

@pytest.mark.parametrize("b", [3, 5, 101])
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_psi_fixed_points(b, k):
    assert psi(0.0, b, k) == 0.0
    assert psi(1.0, b, k) == 1.0
    assert psi(0.5, b, k) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("b", [3, 5, 101])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_psi_monotone_on_grid(b, k):
    values = psi(GRID, b, k)
    assert np.all(np.diff(values) >= 0.0)
    assert np.all((values >= 0.0) & (values <= 1.0))


@pytest.mark.parametrize("k", [1, 2])
def test_psi_strictly_increasing_for_small_width(k):
    assert np.all(np.diff(psi(GRID, 3, k)) > 0.0)


def test_psi_one_step_is_median_of_three_law():
    assert psi(0.25, 3, 1) == pytest.approx(0.15625, abs=1e-14)
    np.testing.assert_allclose(psi(GRID, 3, 1), 3 * GRID ** 2 - 2 * GRID ** 3, atol=1e-14)


def test_psi_zero_steps_is_identity():
    np.testing.assert_array_equal(psi(GRID, 7, 0), GRID)


def test_psi_composes():
    np.testing.assert_allclose(psi(psi(GRID, 5, 1), 5, 2), psi(GRID, 5, 3), atol=1e-13)


def test_psi_validates_width():
    with pytest.raises(InvalidParameterError):
        psi(0.5, 4, 1)


# ── θ_b ─────────────────────────────────────────────────────────────────────

def test_theta_small_widths():
    assert theta_b(3) == pytest.approx(1.5)
    assert theta_b(5) == pytest.approx(120 / (16 * 4))


def test_theta_matches_beta_density_at_half():
    for b in (3, 11, 201):
        m = (b - 1) // 2
        assert theta_b(b) == pytest.approx(beta_density(0.5, m + 1, m + 1), rel=1e-10)


def test_theta_stirling_ratio():
    b = 10 ** 5 + 1
    assert theta_b(b) > 0
    assert theta_b(b) / math.sqrt(2 * b / math.pi) == pytest.approx(1.0, abs=0.01)


# ── p̃ ──────────────────────────────────────────────────────────────────────

def test_ptilde_examples():
    assert ptilde(1, 1) == pytest.approx(0.5, abs=1e-12)
    assert ptilde(1, 2) == pytest.approx(1 - math.sqrt(0.5), abs=1e-11)
    assert ptilde(2, 3) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=60)
@given(N=st.integers(1, 40), data=st.data())
def test_ptilde_symmetry_and_root(N, data):
    K = data.draw(st.integers(1, N))
    p = ptilde(K, N)
    assert 0.0 < p < 1.0
    assert p + ptilde(N + 1 - K, N) == pytest.approx(1.0, abs=1e-10)
    assert order_stat_cdf(p, K, N) == pytest.approx(0.5, abs=1e-9)


def test_ptilde_increases_with_index():
    values = [ptilde(K, 6) for K in range(1, 7)]
    assert values == sorted(values)


@pytest.mark.parametrize("K, N", [(0, 3), (4, 3), (1, 0), (1.5, 3)])
def test_ptilde_domain(K, N):
    with pytest.raises(InvalidParameterError):
        ptilde(K, N)


# ── Parameter checks ────────────────────────────────────────────────────────

@pytest.mark.parametrize("b", [1, 2, 4, 100, True, 3.5])
def test_width_must_be_odd_and_at_least_three(b):
    with pytest.raises(InvalidParameterError):
        check_width(b)


@pytest.mark.parametrize("N, Ks", [(4, [2, 2, 3]), (4, [3, 1]), (4, [0, 1]), (4, [5]), (3, []), (0, [1])])
def test_index_vector_rejected(N, Ks):
    with pytest.raises(InvalidParameterError):
        check_indices(N, Ks)
