from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from engines.analytics import remedian_cdf
from engines.distributions import Normal, Uniform01
from engines.multi_quantile import (
    MultiQuantileEstimator,
    choose_order_statistic,
    multi_breakdown,
    multi_cdf,
    new_multi,
    ptilde,
)
from engines.remedian import RemedianSketch
from errors import CapacityError, EmptySketchError, InvalidParameterError, NotAtCapacityError


def test_buffer_passes_order_statistics():
    est = new_multi(3, [1, 3], 1, 3).extend([5, 1, 3])
    first, last = est.remedians
    assert first.snapshot().rows[0] == [1.0]
    assert last.snapshot().rows[0] == [5.0]
    assert est.pending == 0
    assert est.count() == 3


def test_single_slot_buffer_is_a_plain_remedian():
    rng = np.random.default_rng(2)
    values = rng.standard_normal(25)
    est = new_multi(1, [1], 2, 5).extend(values)
    assert est.final_estimates() == [RemedianSketch(2, 5).extend(values).final_estimate()]


@pytest.mark.parametrize("Ks", [[2, 2, 3], [3, 1], [0, 2], [1, 5]])
def test_bad_indices(Ks):
    with pytest.raises(InvalidParameterError):
        MultiQuantileEstimator(4, Ks, 2, 3)


def test_capacity_and_final_estimates_ordered():
    rng = np.random.default_rng(4)
    est = new_multi(4, [1, 2, 3, 4], 2, 3)
    assert est.capacity == 36
    est.extend(rng.standard_normal(36))
    finals = est.final_estimates()
    assert finals == sorted(finals)
    with pytest.raises(CapacityError):
        est.insert(0.0)


def test_query_reports_ignored_buffer():
    est = new_multi(3, [2], 2, 3)
    est.extend([1.0, 2.0])
    with pytest.raises(EmptySketchError):
        est.query()
    est.extend([3.0, 9.0])
    result = est.query()
    assert result.estimates == [2.0]
    assert result.pending == 1
    assert result.n_consumed == 3
    assert result.remedian_n == 1
    assert result.ptildes == [pytest.approx(0.5)]
    with pytest.raises(NotAtCapacityError):
        est.final_estimates()


def test_count_includes_buffer():
    est = new_multi(4, [1, 4], 1, 3).extend(range(6))
    assert est.count() == 6
    assert est.pending == 2


def test_multi_breakdown_examples():
    assert multi_breakdown(1, [1], 1, 3) == Fraction(2, 3)
    assert multi_breakdown(4, [1, 2, 3, 4], 2, 3) == Fraction(1, 4) * Fraction(4, 9)
    assert multi_breakdown(5, [3], 2, 3) == Fraction(4, 15)
    assert new_multi(5, [3], 2, 3).breakdown_point() == Fraction(4, 15)


def test_ptilde_reexported():
    assert ptilde(1, 2) == pytest.approx(1 - 0.5 ** 0.5, abs=1e-11)


def test_choose_order_statistic_prefers_small_buffers():
    assert choose_order_statistic(0.5, 9)[:2] == (1, 1)


@pytest.mark.parametrize("p", [0.1, 0.25, 0.9])
def test_choose_order_statistic_is_the_closest(p):
    K, N, pt = choose_order_statistic(p, 8)
    assert pt == ptilde(K, N)
    best = min(abs(ptilde(k, n) - p) for n in range(1, 9) for k in range(1, n + 1))
    assert abs(pt - p) == best


def test_choose_order_statistic_domain():
    with pytest.raises(InvalidParameterError):
        choose_order_statistic(1.0, 4)


def test_multi_cdf_reduces_to_remedian_cdf():
    F = Normal(0.0, 1.0)
    x = np.linspace(-2.0, 2.0, 9)
    np.testing.assert_allclose(multi_cdf(x, F, 1, 1, 2, 3), remedian_cdf(x, F, 3, 2), atol=1e-14)


def test_multi_cdf_median_sits_at_the_target_quantile():
    F = Uniform01()
    N, K = 4, 1
    q = F.quantile(ptilde(K, N))
    assert multi_cdf(q, F, N, K, 2, 5) == pytest.approx(0.5, abs=1e-9)


def test_small_scale_law_matches_composed_cdf():
    F = Uniform01()
    N, K, k, b = 3, 2, 1, 3
    rng = np.random.default_rng(17)
    finals = [
        new_multi(N, [K], k, b).extend(F.sample_n(rng, N * b)).final_estimates()[0]
        for _ in range(3000)
    ]
    result = stats.kstest(finals, lambda x: multi_cdf(x, F, N, K, k, b))
    assert result.pvalue > 0.001
