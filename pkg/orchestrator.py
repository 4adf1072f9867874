"""
Orchestrator
-------------
One entry point per command-line verb:

  stream    feed parsed numbers through a RemedianSketch and answer a query
  analyze   collect every closed-form quantity for (k, b, F) and an optional
            ℓ-remedian (N, Ks)
  run       dispatch a named experiment to the enumeration or simulation
            agent, time it, and (with check=True) gate on its tolerances
"""

import logging
import math
import time
from typing import Callable, Dict, Iterable, Iterator, Optional, Sequence

from agents.enumeration_agent import EnumerationAgent
from agents.report_agent import ReportAgent
from agents.simulation_agent import SimulationAgent
from engines import analytics
from engines.distributions import DistributionSpec
from engines.multi_quantile import multi_breakdown
from engines.remedian import RemedianSketch
from engines.special import check_indices, ptilde, theta_b
from errors import InputParseError, InvalidParameterError, ToleranceViolation
from models.report_model import EmpiricalReport, ExperimentConfig

_log = logging.getLogger("remedian.orchestrator")

EXPERIMENTS = (
    "exact-rank", "rank", "quad", "psirem", "multi",
    "components", "breakdown", "normality", "chain",
)

_CORRELATION_PAIRS = [
    ("mean", "median"), ("mean", "remedian"),
    ("median", "remedian"), ("remedian", "remedian_rank"),
]


def parse_stream(lines: Iterable[str]) -> Iterator[float]:
    """Newline-delimited decimals (LF or CRLF); blank lines are skipped."""
    for number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        if "_" in text:
            raise InputParseError(number, text)
        try:
            value = float(text)
        except ValueError:
            raise InputParseError(number, text) from None
        if not math.isfinite(value):
            raise InputParseError(number, text)
        yield value


def _fraction_fields(value) -> dict:
    return {"breakdown_point": f"{value.numerator}/{value.denominator}", "breakdown_value": float(value)}


class Orchestrator:
    def __init__(self):
        self._enumeration = EnumerationAgent()
        self._simulation = SimulationAgent()
        self._reports = ReportAgent()

    # ── Public API ─────────────────────────────────────────────────────────

    def stream(self, lines: Iterable[str], k: int, b: int) -> dict:
        sketch = RemedianSketch(k, b)
        sketch.extend(parse_stream(lines))
        result = sketch.query()
        out = {
            "estimate": result.estimate,
            "n": result.n,
            "digits": result.digits,
            "capacity": sketch.capacity,
            "at_capacity": result.at_capacity,
        }
        out.update(_fraction_fields(sketch.breakdown_point()))
        return out

    def analyze(self, k: int, b: int, F: DistributionSpec,
                N: Optional[int] = None, Ks: Optional[Sequence[int]] = None) -> dict:
        mad, mad_var = analytics.rank_moments(k, b)
        rank_mean, rank_var = analytics.rank_normal_approx(k, b)
        quad = analytics.quad_covariance(F, k)
        corr = quad.correlation()
        v_rem_med, v_med_mean, v_rem_mean = analytics.locdiff_variances(F, k)

        out = {"k": k, "b": b, "distribution": F.literal}
        out.update(_fraction_fields(analytics.breakdown_point(k, b)))
        out.update({
            "central_fraction": analytics.central_fraction(k, b),
            "capacity": b ** k,
            "memory_cells": k * b,
            "tau_sq": analytics.tau_sq(k),
            "theta_b": theta_b(b),
            "rank_moments": {"mean_abs_dev": mad, "var_abs_dev": mad_var},
            "rank_normal_approx": {"mean": rank_mean, "variance": rank_var},
            "moments": F.moments().to_dict(),
            "median_clt_variance": analytics.median_clt_variance(F),
            "remedian_variance": analytics.remedian_variance(F, k),
            "quad_covariance": quad.to_dict(),
            "correlations": {
                f"{a}_{c}": (float(corr[quad.labels.index(a), quad.labels.index(c)])
                             if a in quad.labels else None)
                for a, c in _CORRELATION_PAIRS
            },
            "locdiff": {
                "remedian_median": v_rem_med,
                "median_mean": v_med_mean,
                "remedian_mean": v_rem_mean,
                "rate": analytics.locdiff_rate(F, k),
            },
            "are": {
                "remedian_vs_median": analytics.are_remedian_vs_median(k),
                "remedian_vs_mean": analytics.are_remedian_vs_mean(F, k),
                "median_vs_mean": analytics.are_median_vs_mean(F),
            },
        })
        if not quad.mean_available:
            out["mean_coordinate"] = "unavailable"
        if N is not None or Ks:
            N = N or 1
            Ks = check_indices(N, Ks or list(range(1, N + 1)))
            multi = analytics.multi_covariance(F, N, Ks, k, b)
            out["multi"] = {
                "ptildes": [ptilde(K, N) for K in Ks],
                **_fraction_fields(multi_breakdown(N, Ks, k, b)),
                "covariance": multi.to_dict(),
                "correlation": multi.correlation().tolist(),
                "covariance_row_arcsin": analytics.row_arcsin_covariance(multi.matrix, k).tolist(),
            }
        return out

    def run(self, experiment: str, config: ExperimentConfig, check: bool = False) -> EmpiricalReport:
        handler = self._handlers().get(experiment)
        if handler is None:
            raise InvalidParameterError(
                f"unknown experiment {experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
        _log.info("start %s [%s] replicates=%d seed=%d threads=%d",
                  experiment, config.param, config.replicates, config.seed, config.threads)
        started = time.perf_counter()
        report = handler(config)
        report.runtime_seconds = time.perf_counter() - started
        _log.info("end %s in %.2fs: %s", experiment, report.runtime_seconds,
                  self._reports.summary_line(report))
        if check:
            self.gate(report)
        return report

    def gate(self, report: EmpiricalReport) -> None:
        failed = report.check()
        for row in failed:
            _log.warning("%s %s: observed %r, predicted %r (rule %s, tol %g)",
                         report.experiment, row.statistic, row.observed,
                         row.predicted, row.rule, row.tol)
        if failed:
            raise ToleranceViolation(self._reports.summary_line(report))

    def render(self, reports: Sequence[EmpiricalReport], fmt: str) -> str:
        return self._reports.render(reports, fmt)

    # ── Dispatch ───────────────────────────────────────────────────────────

    def _handlers(self) -> Dict[str, Callable[[ExperimentConfig], EmpiricalReport]]:
        sim, enum = self._simulation, self._enumeration
        return {
            "exact-rank": lambda c: enum.exact_rank_report(c.k, c.b),
            "breakdown": lambda c: enum.breakdown_report(c.k, c.b),
            "rank": sim.mc_rank_distribution,
            "normality": sim.mc_remedian_normality,
            "chain": sim.mc_chain_normality,
            "quad": sim.mc_quadrivariate,
            "psirem": sim.mc_psirem_identity,
            "multi": sim.mc_multi_quantile,
            "components": sim.mc_component_remedians,
        }
