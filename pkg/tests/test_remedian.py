import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from engines.remedian import (
    IteratedRemedian,
    RemedianSketch,
    batch_chain,
    batch_rank,
    batch_remedian,
    new_chain,
    new_sketch,
)
from errors import (
    CapacityError,
    EmptySketchError,
    InvalidParameterError,
    NotAtCapacityError,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def _digits_value(digits, b):
    return sum(d * b ** i for i, d in enumerate(digits))


# ── Construction ─────────────────────────────────────────────────────────────

def test_new_sketch_sizes():
    sketch = new_sketch(2, 3)
    assert sketch.capacity == 9
    assert sketch.memory_cells == 6
    assert sketch.count() == 0
    assert sketch.fill == [0, 0]


@pytest.mark.parametrize("k, b", [(0, 3), (2, 4), (2, 1), (-1, 5)])
def test_invalid_dimensions(k, b):
    with pytest.raises(InvalidParameterError):
        RemedianSketch(k, b)


# ── Insert and query ─────────────────────────────────────────────────────────

def test_median_of_three():
    sketch = new_sketch(1, 3).extend([3, 1, 2])
    result = sketch.query()
    assert result.estimate == 2.0
    assert result.n == 3
    assert result.at_capacity
    assert sketch.final_estimate() == 2.0


def test_partial_query_trace():
    sketch = new_sketch(2, 3).extend([5, 1, 3, 2])
    result = sketch.query()
    assert result.estimate == 3.0
    assert result.digits == [1, 1]
    assert not result.at_capacity


def test_query_on_single_value():
    assert new_sketch(3, 5).insert(7.5).query().estimate == 7.5


def test_capacity_digits_are_the_last_row():
    sketch = new_sketch(2, 3).extend(range(9))
    result = sketch.query()
    assert result.digits == [0, 3]
    assert result.at_capacity


def test_errors():
    sketch = new_sketch(1, 3)
    with pytest.raises(EmptySketchError):
        sketch.query()
    sketch.extend([1, 2])
    with pytest.raises(NotAtCapacityError):
        sketch.final_estimate()
    sketch.insert(3)
    with pytest.raises(CapacityError):
        sketch.insert(4)
    assert sketch.count() == 3


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), "x", None])
def test_non_finite_input_rejected(bad):
    sketch = new_sketch(1, 3)
    with pytest.raises(InvalidParameterError):
        sketch.insert(bad)
    assert sketch.count() == 0


def test_digits_identity_fuzz():
    rng = np.random.default_rng(11)
    sketch = RemedianSketch(5, 11)
    for n, x in enumerate(rng.standard_normal(100_000), start=1):
        sketch.insert(x)
        assert _digits_value(sketch.fill, 11) == n


def test_query_weighted_median_stays_in_range():
    rng = np.random.default_rng(3)
    sketch = RemedianSketch(3, 5)
    values = rng.standard_normal(124)
    for x in values:
        sketch.insert(x)
        est = sketch.query().estimate
        assert values.min() <= est <= values.max()


def test_reset_and_snapshot():
    sketch = new_sketch(2, 3).extend([4, 2, 9, 1])
    snap = sketch.snapshot()
    assert snap.n == 4
    assert snap.rows == [[1.0], [4.0]]
    assert snap.fill == [1, 1]
    sketch.reset()
    assert sketch.count() == 0
    assert sketch.fill == [0, 0]
    assert snap.rows == [[1.0], [4.0]]
    assert sketch.to_dict()["capacity"] == 9


def test_breakdown_point():
    assert new_sketch(2, 3).breakdown_point() == Fraction(4, 9)
    assert new_sketch(1, 101).breakdown_point() == Fraction(51, 101)


# ── Batch evaluation ─────────────────────────────────────────────────────────

@pytest.mark.parametrize("k, b", [(1, 3), (2, 3), (3, 3), (2, 5), (1, 9)])
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_batch_equals_streaming(k, b, data):
    values = data.draw(arrays(np.float64, b ** k, elements=finite))
    streamed = RemedianSketch(k, b).extend(values).final_estimate()
    assert batch_remedian(values, k, b) == streamed


def test_batch_over_leading_axes():
    rng = np.random.default_rng(5)
    values = rng.standard_normal((4, 6, 25))
    out = batch_remedian(values, 2, 5)
    assert out.shape == (4, 6)
    assert out[2, 3] == RemedianSketch(2, 5).extend(values[2, 3]).final_estimate()


def test_batch_rejects_wrong_length():
    with pytest.raises(InvalidParameterError):
        batch_remedian(np.zeros(10), 2, 3)


def test_monotone_equivariance():
    rng = np.random.default_rng(8)
    values = rng.standard_normal((200, 27))
    for g in (lambda x: 2.0 * x + 1.0, np.arctan, np.exp):
        np.testing.assert_array_equal(batch_remedian(g(values), 3, 3), g(batch_remedian(values, 3, 3)))


def test_depends_on_ranks_only():
    rng = np.random.default_rng(9)
    values = rng.standard_normal((300, 25))
    ranks = values.argsort(axis=1).argsort(axis=1) + 1
    np.testing.assert_array_equal(batch_remedian(ranks, 2, 5), batch_rank(values, 2, 5))
    np.testing.assert_array_equal(batch_rank(np.exp(values), 2, 5), batch_rank(values, 2, 5))


@pytest.mark.parametrize("k, b", [(2, 5), (3, 3)])
def test_rank_stays_inside_the_central_band(k, b):
    n, m = b ** k, (b + 1) // 2
    rng = np.random.default_rng(12)
    orders = rng.permuted(np.tile(np.arange(1.0, n + 1.0), (20_000, 1)), axis=1)
    ranks = batch_rank(orders, k, b)
    assert ranks.min() >= m ** k
    assert ranks.max() <= n + 1 - m ** k
    np.testing.assert_array_equal(ranks, batch_remedian(orders, k, b))


# ── Iterated remedian ────────────────────────────────────────────────────────

def test_chain_equals_stack_on_every_order():
    orders = np.array(list(itertools.permutations(range(1, 10))), dtype=float)
    np.testing.assert_array_equal(batch_chain(orders, [(1, 3), (1, 3)]), batch_remedian(orders, 2, 3))


def test_streaming_chain_matches_stack():
    rng = np.random.default_rng(21)
    for values in rng.standard_normal((300, 27)):
        chain = new_chain([(1, 3), (2, 3)]).extend(values)
        assert chain.final_estimate() == RemedianSketch(3, 3).extend(values).final_estimate()


def test_chain_stage_resets_and_capacity():
    chain = IteratedRemedian([(1, 3), (1, 5)])
    assert chain.capacity == 15
    chain.extend(range(3))
    assert chain.stages[0].count() == 0
    assert chain.stages[1].count() == 1
    with pytest.raises(NotAtCapacityError):
        chain.final_estimate()
    chain.extend(range(12))
    with pytest.raises(CapacityError):
        chain.insert(0)
    assert chain.breakdown_point() == Fraction(2, 3) * Fraction(3, 5)


def test_chain_needs_a_stage():
    with pytest.raises(InvalidParameterError):
        IteratedRemedian([])
