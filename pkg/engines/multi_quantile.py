"""
ℓ-Remedian
-----------
A size-N front buffer above ℓ remedians sharing (k, b). When the buffer
fills, its K_j-th smallest value goes to remedian j and the buffer empties,
so remedian j estimates the quantile F^{-1}(p̃_j) with B_{K_j,N}(p̃_j) = 1/2.

Usage
-----
  est = MultiQuantileEstimator(N=3, Ks=[1, 3], k=1, b=3)
  est.extend([5, 1, 3])        # remedian 1 receives 1, remedian 2 receives 5
"""

import logging
import threading
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from engines.analytics import breakdown_point
from engines.remedian import RemedianSketch, _finite
from engines.special import check_indices, check_rows, check_width, order_stat_cdf, psi, ptilde
from errors import CapacityError, EmptySketchError, InvalidParameterError, NotAtCapacityError
from models.sketch_model import MultiQueryResult

__all__ = [
    "MultiQuantileEstimator",
    "new_multi",
    "multi_breakdown",
    "choose_order_statistic",
    "multi_cdf",
    "ptilde",
]

_log = logging.getLogger("remedian.multi")


class MultiQuantileEstimator:
    """N-value buffer feeding ℓ remedians; single writer, consistent reads."""

    def __init__(self, N: int, Ks: Sequence[int], k: int, b: int):
        self.Ks = check_indices(N, Ks)
        self.N = int(N)
        self.k = check_rows(k)
        self.b = check_width(b)
        self._buffer: List[float] = []
        self._remedians = [RemedianSketch(self.k, self.b) for _ in self.Ks]
        self._lock = threading.RLock()

    # ── Public API ─────────────────────────────────────────────────────────

    @property
    def ell(self) -> int:
        return len(self.Ks)

    @property
    def capacity(self) -> int:
        return self.N * self.b ** self.k

    @property
    def ptildes(self) -> List[float]:
        return [ptilde(K, self.N) for K in self.Ks]

    @property
    def remedians(self) -> List[RemedianSketch]:
        return list(self._remedians)

    def count(self) -> int:
        with self._lock:
            return self._remedians[0].count() * self.N + len(self._buffer)

    @property
    def pending(self) -> int:
        return len(self._buffer)

    @property
    def at_capacity(self) -> bool:
        return self._remedians[0].at_capacity

    def insert(self, x: float) -> "MultiQuantileEstimator":
        value = _finite(x)
        with self._lock:
            if self.at_capacity:
                raise CapacityError(f"estimator at capacity N·b^k = {self.capacity}")
            self._buffer.append(value)
            if len(self._buffer) == self.N:
                # stable sort keeps equal values in arrival order
                ordered = sorted(self._buffer)
                for K, remedian in zip(self.Ks, self._remedians):
                    remedian.insert(ordered[K - 1])
                self._buffer.clear()
        return self

    def extend(self, values: Iterable[float]) -> "MultiQuantileEstimator":
        for x in values:
            self.insert(x)
        return self

    def query(self) -> MultiQueryResult:
        """Per-remedian answers; values still in the buffer are not used."""
        with self._lock:
            n = self._remedians[0].count()
            if n == 0:
                raise EmptySketchError("no data has reached the remedians")
            if self._buffer:
                _log.info("ignoring %d buffered value(s) not yet passed on", len(self._buffer))
            return MultiQueryResult(
                estimates=[r.query().estimate for r in self._remedians],
                ptildes=self.ptildes,
                n_consumed=n * self.N,
                pending=len(self._buffer),
                at_capacity=self.at_capacity,
                remedian_n=n,
            )

    def final_estimates(self) -> List[float]:
        with self._lock:
            if not self.at_capacity:
                raise NotAtCapacityError(
                    f"not at capacity ({self.count()} of {self.capacity}); use query")
            return [r.final_estimate() for r in self._remedians]

    def breakdown_point(self) -> Fraction:
        return multi_breakdown(self.N, self.Ks, self.k, self.b)

    def __repr__(self) -> str:
        return f"MultiQuantileEstimator(N={self.N}, Ks={self.Ks}, k={self.k}, b={self.b})"


def new_multi(N: int, Ks: Sequence[int], k: int, b: int) -> MultiQuantileEstimator:
    return MultiQuantileEstimator(N, Ks, k, b)


def multi_breakdown(N: int, Ks: Sequence[int], k: int, b: int) -> Fraction:
    """min_j [min(K_j, N − K_j + 1)/N]·(⌈b/2⌉/b)^k."""
    Ks = check_indices(N, Ks)
    return min(Fraction(min(K, N - K + 1), N) for K in Ks) * breakdown_point(k, b)


def choose_order_statistic(p: float, n_max: int) -> Tuple[int, int, float]:
    """
    Scan 1 ≤ K ≤ N ≤ n_max for the p̃(K, N) closest to p.
    Ties go to the smallest N, then the smallest K. Returns (K, N, p̃).
    """
    if not 0.0 < p < 1.0:
        raise InvalidParameterError(f"target probability must lie in (0, 1), got {p}")
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be positive, got {n_max}")
    best = None
    for N in range(1, int(n_max) + 1):
        for K in range(1, N + 1):
            pt = ptilde(K, N)
            gap = abs(pt - p)
            if best is None or gap < best[0]:
                best = (gap, K, N, pt)
    _, K, N, pt = best
    return K, N, pt


def multi_cdf(x, F, N: int, K: int, k: int, b: int):
    """Pr(final estimate of remedian K ≤ x) = Ψ_b^{(k)}(B_{K,N}(F(x)))."""
    check_indices(N, [K])
    return psi(order_stat_cdf(np.clip(F.cdf(x), 0.0, 1.0), K, N), b, k)
