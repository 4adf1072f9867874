"""
Remedian Sketch
----------------
Streaming median-of-medians summary held in a k×b matrix.

  insert          value goes to row 1; a full row passes its median up one row
  query           weighted median of every stored cell, row i weighing b^{i−1}
  final_estimate  the median row k emits on the b^k-th insert
  batch_remedian  vectorised full-capacity estimate for whole arrays of streams

Usage
-----
  sketch = RemedianSketch(k=2, b=3)
  for x in (5, 1, 3, 2):
      sketch.insert(x)
  sketch.query().estimate   # 3.0
"""

import logging
import math
import threading
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from engines.analytics import breakdown_point, chain_breakdown
from engines.special import check_rows, check_width
from errors import (
    CapacityError,
    EmptySketchError,
    InvalidParameterError,
    NotAtCapacityError,
)
from models.sketch_model import QueryResult, SketchSnapshot

_log = logging.getLogger("remedian.sketch")


def _finite(x: float) -> float:
    try:
        value = float(x)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"input must be a finite real, got {x!r}") from None
    if not math.isfinite(value):
        raise InvalidParameterError(f"input must be a finite real, got {x!r}")
    return value


def _middle(row: List[float]) -> float:
    # b is odd, so the middle order statistic is unique; selection, not a sort
    m = len(row) // 2
    return float(np.partition(np.asarray(row, dtype=float), m)[m])


class RemedianSketch:
    """k×b remedian matrix; one writer at a time, queries see a consistent state."""

    def __init__(self, k: int, b: int):
        self.k = check_rows(k)
        self.b = check_width(b)
        self._rows: List[List[float]] = [[] for _ in range(self.k)]
        self._n = 0
        self._final: Optional[float] = None
        self._final_digits: List[int] = []
        self._lock = threading.RLock()

    # ── Public API ─────────────────────────────────────────────────────────

    @property
    def capacity(self) -> int:
        return self.b ** self.k

    @property
    def memory_cells(self) -> int:
        return self.k * self.b

    def count(self) -> int:
        return self._n

    @property
    def fill(self) -> List[int]:
        with self._lock:
            return [len(row) for row in self._rows]

    @property
    def at_capacity(self) -> bool:
        return self._n == self.capacity

    def insert(self, x: float) -> "RemedianSketch":
        value = _finite(x)
        with self._lock:
            if self._n >= self.capacity:
                raise CapacityError(f"sketch at capacity b^k = {self.capacity}")
            self._n += 1
            for i, row in enumerate(self._rows):
                row.append(value)
                if len(row) < self.b:
                    break
                value = _middle(row)
                if i == self.k - 1:
                    self._final_digits = [len(r) for r in self._rows]
                    self._final = value
                    _log.debug("k=%d b=%d reached capacity, final estimate %r", self.k, self.b, value)
                row.clear()
        return self

    def extend(self, values: Iterable[float]) -> "RemedianSketch":
        for x in values:
            self.insert(x)
        return self

    def query(self) -> QueryResult:
        """Weighted median: first sorted cell whose cumulative weight reaches n/2."""
        with self._lock:
            if self._n == 0:
                raise EmptySketchError("no data")
            if self._final is not None:
                return QueryResult(self._final, self._n, list(self._final_digits), at_capacity=True)
            cells = sorted(
                (value, i, j)
                for i, row in enumerate(self._rows)
                for j, value in enumerate(row)
            )
            cumulative = 0
            for value, i, _ in cells:
                cumulative += self.b ** i
                if 2 * cumulative >= self._n:
                    return QueryResult(value, self._n, [len(r) for r in self._rows])
        raise AssertionError("weighted median not reached; fill counts are inconsistent")

    def final_estimate(self) -> float:
        with self._lock:
            if self._final is None:
                raise NotAtCapacityError(
                    f"not at capacity ({self._n} of {self.capacity}); use query")
            return self._final

    def breakdown_point(self) -> Fraction:
        return breakdown_point(self.k, self.b)

    def reset(self) -> None:
        with self._lock:
            for row in self._rows:
                row.clear()
            self._n = 0
            self._final = None
            self._final_digits = []

    def snapshot(self) -> SketchSnapshot:
        with self._lock:
            return SketchSnapshot(
                k=self.k, b=self.b, n=self._n,
                rows=[list(row) for row in self._rows], final=self._final,
            )

    def to_dict(self) -> dict:
        out = self.snapshot().to_dict()
        out["capacity"] = self.capacity
        return out

    def __repr__(self) -> str:
        return f"RemedianSketch(k={self.k}, b={self.b}, n={self._n})"


def new_sketch(k: int, b: int) -> RemedianSketch:
    return RemedianSketch(k, b)


# ── Iterated remedian ──────────────────────────────────────────────────────

class IteratedRemedian:
    """
    Chain of remedian matrices: the value stage j emits at capacity is the
    next input of stage j+1, after which stage j starts over empty.
    """

    def __init__(self, params: Sequence[Tuple[int, int]]):
        if not params:
            raise InvalidParameterError("a chain needs at least one (k, b) stage")
        self._stages = [RemedianSketch(k, b) for k, b in params]
        self.params = [(s.k, s.b) for s in self._stages]
        self._n = 0
        self._final: Optional[float] = None
        self._lock = threading.RLock()

    @property
    def stages(self) -> List[RemedianSketch]:
        return list(self._stages)

    @property
    def capacity(self) -> int:
        return math.prod(s.capacity for s in self._stages)

    def count(self) -> int:
        return self._n

    def insert(self, x: float) -> "IteratedRemedian":
        value = _finite(x)
        with self._lock:
            if self._n >= self.capacity:
                raise CapacityError(f"chain at capacity {self.capacity}")
            self._n += 1
            last = len(self._stages) - 1
            for j, stage in enumerate(self._stages):
                stage.insert(value)
                if not stage.at_capacity:
                    break
                value = stage.final_estimate()
                if j == last:
                    self._final = value
                else:
                    stage.reset()
        return self

    def extend(self, values: Iterable[float]) -> "IteratedRemedian":
        for x in values:
            self.insert(x)
        return self

    def final_estimate(self) -> float:
        with self._lock:
            if self._final is None:
                raise NotAtCapacityError(
                    f"not at capacity ({self._n} of {self.capacity}); use query")
            return self._final

    def breakdown_point(self) -> Fraction:
        return chain_breakdown(self.params)


def new_chain(params: Sequence[Tuple[int, int]]) -> IteratedRemedian:
    return IteratedRemedian(params)


# ── Vectorised full-capacity evaluation ────────────────────────────────────

def batch_remedian(values: np.ndarray, k: int, b: int) -> np.ndarray:
    """
    Final estimate of a full k×b remedian for every stream along the last axis.

    values has shape (..., b^k) in arrival order; the result has shape (...).
    Consecutive groups of b become row-1 buffers, so this is exactly what the
    streaming sketch emits on its b^k-th insert.
    """
    k = check_rows(k)
    b = check_width(b)
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != b ** k:
        raise InvalidParameterError(f"last axis must hold b^k = {b ** k} values")
    lead = arr.shape[:-1]
    m = b // 2
    for _ in range(k):
        arr = np.partition(arr.reshape(*lead, -1, b), m, axis=-1)[..., m]
    return arr[..., 0]


def batch_chain(values: np.ndarray, params: Sequence[Tuple[int, int]]) -> np.ndarray:
    """batch_remedian applied stage by stage for an iterated remedian."""
    arr = np.asarray(values, dtype=float)
    total = math.prod(b ** k for k, b in params)
    if arr.ndim == 0 or arr.shape[-1] != total:
        raise InvalidParameterError(f"last axis must hold {total} values")
    lead = arr.shape[:-1]
    for k, b in params:
        arr = batch_remedian(arr.reshape(*lead, -1, b ** k), k, b)
    return arr[..., 0]


def batch_rank(values: np.ndarray, k: int, b: int) -> np.ndarray:
    """Rank among its own stream of each batch_remedian estimate (1 = smallest)."""
    arr = np.asarray(values, dtype=float)
    est = batch_remedian(arr, k, b)
    return np.count_nonzero(arr <= est[..., None], axis=-1)
