"""
Enumeration Agent
------------------
Exhaustive experiments over every arrival order of the ranks 1..b^k:

  - exact rank law of the final estimate (integer counts, no tolerance)
  - adversarial breakdown: the smallest set of stream positions that, sent
    to +M, pushes the estimate to M for some order

All permutations are pushed through `batch_remedian` at once, so the
362,880 orders of a 3×3 matrix take seconds rather than minutes.

Usage
-----
  from agents.enumeration_agent import EnumerationAgent
  law = EnumerationAgent().exact_rank_pmf(2, 3)
  law.reduced()     # ((0, 0, 0, 3, 8, 3, 0, 0, 0), 14)
"""

import itertools
import logging
import math
from typing import Optional

import numpy as np

from engines.analytics import breakdown_point
from engines.remedian import batch_remedian
from engines.special import check_rows, check_width, order_stat_cdf, psi
from errors import InvalidParameterError
from models.report_model import BreakdownResult, EmpiricalReport, ExactRankLaw

_log = logging.getLogger("remedian.enumeration")

MAX_ENUMERATED = 10          # b^k; 10! orders still fit in memory, 11! do not
_MIXTURE_TOL = 1e-9


def all_orders(n: int) -> np.ndarray:
    """Every arrival order of the ranks 1..n, one per row."""
    return np.array(list(itertools.permutations(range(1, n + 1))), dtype=float)


def _checked_size(k: int, b: int) -> int:
    k, b = check_rows(k), check_width(b)
    n = b ** k
    if n > MAX_ENUMERATED:
        raise InvalidParameterError(
            f"exhaustive enumeration needs b^k ≤ {MAX_ENUMERATED}, got {n}")
    return n


def mixture_pmf(k: int, b: int) -> np.ndarray:
    """
    Rank law implied by the exact cdf: Ψ_b^{(k)}(u) = Σ_r Pr(R = r)·B_{r,n}(u),
    solved at n interior points.
    """
    n = b ** k
    nodes = np.arange(1, n + 1) / (n + 1.0)
    basis = np.column_stack([order_stat_cdf(nodes, r, n) for r in range(1, n + 1)])
    return np.linalg.solve(basis, psi(nodes, b, k))


class EnumerationAgent:

    # ── Public API ─────────────────────────────────────────────────────────

    def exact_rank_pmf(self, k: int, b: int) -> ExactRankLaw:
        n = _checked_size(k, b)
        orders = all_orders(n)
        ranks = batch_remedian(orders, k, b).astype(np.int64)
        counts = np.bincount(ranks, minlength=n + 1)[1:]
        _log.debug("k=%d b=%d: %d orders enumerated", k, b, len(orders))
        return ExactRankLaw(k=k, b=b, counts=tuple(int(c) for c in counts), total=len(orders))

    def adversarial_breakdown(self, k: int, b: int, magnitude: Optional[float] = None) -> BreakdownResult:
        """
        For s = 1, 2, … try every set of s positions on every order. The first
        s with a breaking set is the witness size and s − 1 the safe size.
        """
        n = _checked_size(k, b)
        M = float(magnitude) if magnitude is not None else 1e12 * n
        if not (math.isfinite(M) and M > n):
            raise InvalidParameterError(f"magnitude must exceed the clean maximum {n}, got {M}")
        orders = all_orders(n)
        for size in range(1, n + 1):
            for positions in itertools.combinations(range(n), size):
                corrupted = orders.copy()
                corrupted[:, list(positions)] = M
                estimates = batch_remedian(corrupted, k, b)
                broken = np.flatnonzero(estimates >= M)
                if broken.size:
                    row = int(broken[0])
                    _log.info("k=%d b=%d broken by %d position(s) %s", k, b, size, positions)
                    return BreakdownResult(
                        k=k, b=b, magnitude=M, safe_size=size - 1,
                        witness=tuple(positions),
                        witness_order=tuple(int(v) for v in orders[row]),
                        witness_estimate=float(estimates[row]),
                    )
        raise AssertionError("corrupting every position must break the estimate")

    # ── Reports ────────────────────────────────────────────────────────────

    def exact_rank_report(self, k: int, b: int) -> EmpiricalReport:
        law = self.exact_rank_pmf(k, b)
        n = b ** k
        counts, denominator = law.reduced()
        predicted = mixture_pmf(k, b)
        report = EmpiricalReport("exact-rank", f"k={k};b={b}", law.total, extras={"law": law.to_dict()})
        for r, (c, p) in enumerate(zip(counts, predicted), start=1):
            report.add(f"count_rank_{r}_of_{denominator}", p * denominator, c, rule="abs", tol=_MIXTURE_TOL * denominator)
        probs = np.asarray(law.counts, dtype=float) / law.total
        report.add("symmetry_gap", 0.0, float(np.max(np.abs(probs - probs[::-1]))), rule="exact")
        report.add("ranks_supported", n, int(np.count_nonzero(law.counts)), rule="info")
        return report

    def breakdown_report(self, k: int, b: int, magnitude: Optional[float] = None) -> EmpiricalReport:
        result = self.adversarial_breakdown(k, b, magnitude)
        n = b ** k
        report = EmpiricalReport("breakdown", f"k={k};b={b}", math.factorial(n), extras={"result": result.to_dict()})
        report.add("safe_size", result.predicted_size - 1, result.safe_size, rule="exact")
        report.add("witness_size", result.predicted_size, len(result.witness), rule="exact")
        report.add("witness_verified", 1.0, float(result.verified), rule="exact")
        report.add("breakdown_point", float(breakdown_point(k, b)), len(result.witness) / n, rule="abs", tol=1e-15)
        return report
