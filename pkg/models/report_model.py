"""
Data models for experiment configuration and results.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Dict, List, Optional, Tuple
import json
import math

from errors import InvalidParameterError
from models.analytics_model import _json_number

RULES = ("rel", "abs", "se", "max", "exact", "info")
_SLACK = 1e-12


@dataclass
class ExperimentConfig:
    """Parameters of one Monte-Carlo or enumeration run."""
    distribution: object = None          # DistributionSpec
    k: int = 2
    b: int = 3
    replicates: int = 1000
    seed: int = 0
    N: Optional[int] = None
    Ks: Optional[List[int]] = None
    rho: Optional[float] = None
    stages: Optional[List[Tuple[int, int]]] = None
    threads: int = 1
    batch: int = 64

    def __post_init__(self):
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise InvalidParameterError(f"replicates must be a positive integer, got {self.replicates}")
        if self.threads < 1 or self.batch < 1:
            raise InvalidParameterError("threads and batch must be positive")
        if self.seed is None or int(self.seed) != self.seed:
            raise InvalidParameterError(f"seed must be an integer, got {self.seed!r}")
        self.replicates, self.seed = int(self.replicates), int(self.seed)

    @property
    def param(self) -> str:
        """Compact parameter label used in every report row."""
        parts = [f"k={self.k}", f"b={self.b}"]
        if self.stages:
            parts = ["stages=" + "+".join(f"{k}x{b}" for k, b in self.stages)]
        if self.N is not None:
            parts.append(f"N={self.N}")
        if self.Ks:
            parts.append("Ks=" + "/".join(str(K) for K in self.Ks))
        if self.rho is not None:
            parts.append(f"rho={self.rho:g}")
        if self.distribution is not None:
            parts.append(f"dist={self.distribution.literal}")
        return ";".join(parts)


@dataclass
class ReportRow:
    """
    One compared statistic. `rule` decides how `check` judges it:
      rel    |observed − predicted| ≤ tol·|predicted|
      abs    |observed − predicted| ≤ tol
      se     |observed − predicted| ≤ tol·std_error
      max    observed ≤ tol
      exact  observed == predicted
      info   never fails
    """
    statistic: str
    predicted: Optional[float]
    observed: float
    std_error: Optional[float] = None
    rule: str = "info"
    tol: float = 0.0

    def __post_init__(self):
        if self.rule not in RULES:
            raise InvalidParameterError(f"unknown tolerance rule {self.rule!r}")

    @property
    def passed(self) -> bool:
        o, p = self.observed, self.predicted
        if self.rule == "info":
            return True
        if self.rule == "max":
            return o <= self.tol
        if p is None or not (math.isfinite(o) and math.isfinite(p)):
            return self.rule == "exact" and o == p
        gap = abs(o - p)
        if self.rule == "rel":
            return gap <= self.tol * abs(p) + _SLACK
        if self.rule == "abs":
            return gap <= self.tol + _SLACK
        if self.rule == "se":
            return gap <= self.tol * (self.std_error or 0.0) + _SLACK
        return o == p

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "predicted": None if self.predicted is None else _json_number(self.predicted),
            "observed": _json_number(self.observed),
            "std_error": None if self.std_error is None else _json_number(self.std_error),
            "rule": self.rule,
            "tol": self.tol,
            "passed": self.passed,
        }


@dataclass
class EmpiricalReport:
    """Result of one experiment; `runtime_seconds` never reaches the emitted output."""
    experiment: str
    param: str
    replicates: int
    rows: List[ReportRow] = field(default_factory=list)
    extras: Dict[str, object] = field(default_factory=dict)
    runtime_seconds: float = 0.0

    def add(self, statistic: str, predicted, observed, std_error=None,
            rule: str = "info", tol: float = 0.0) -> ReportRow:
        row = ReportRow(
            statistic=statistic,
            predicted=None if predicted is None else float(predicted),
            observed=float(observed),
            std_error=None if std_error is None else float(std_error),
            rule=rule,
            tol=float(tol),
        )
        self.rows.append(row)
        return row

    def row(self, statistic: str) -> ReportRow:
        for r in self.rows:
            if r.statistic == statistic:
                return r
        raise KeyError(statistic)

    def check(self) -> List[ReportRow]:
        """Rows whose tolerance rule fails."""
        return [r for r in self.rows if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.check()

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "param": self.param,
            "replicate_count": self.replicates,
            "passed": self.passed,
            "rows": [r.to_dict() for r in self.rows],
            "extras": self.extras,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass(frozen=True)
class ExactRankLaw:
    """Exact law of the final-estimate rank: counts[r−1] of `total` input orders give rank r."""
    k: int
    b: int
    counts: Tuple[int, ...]
    total: int

    def reduced(self) -> Tuple[Tuple[int, ...], int]:
        """Counts and denominator divided by their common gcd, e.g. (…, 3, 8, 3, …)/14."""
        g = reduce(gcd, self.counts, self.total)
        return tuple(c // g for c in self.counts), self.total // g

    def probabilities(self) -> Dict[int, Fraction]:
        return {r: Fraction(c, self.total) for r, c in enumerate(self.counts, start=1) if c}

    def to_dict(self) -> dict:
        counts, denominator = self.reduced()
        return {
            "k": self.k,
            "b": self.b,
            "counts": list(counts),
            "denominator": denominator,
            "permutations": self.total,
            "probabilities": {str(r): str(p) for r, p in self.probabilities().items()},
        }


@dataclass(frozen=True)
class BreakdownResult:
    """Largest corruption size no input order survives breaking, plus a breaking witness."""
    k: int
    b: int
    magnitude: float
    safe_size: int
    witness: Tuple[int, ...]             # 0-based stream positions set to +magnitude
    witness_order: Tuple[int, ...]       # ranks 1..b^k in arrival order
    witness_estimate: float

    @property
    def predicted_size(self) -> int:
        return ((self.b + 1) // 2) ** self.k

    @property
    def verified(self) -> bool:
        return self.witness_estimate >= self.magnitude

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "b": self.b,
            "magnitude": self.magnitude,
            "safe_size": self.safe_size,
            "witness_size": len(self.witness),
            "witness": list(self.witness),
            "witness_order": list(self.witness_order),
            "witness_estimate": self.witness_estimate,
            "verified": self.verified,
        }