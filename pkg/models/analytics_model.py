"""
Data models produced by the analytics and distribution engines.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional
import json
import math

import numpy as np


def _json_number(x: float) -> Optional[float]:
    x = float(x)
    return x if math.isfinite(x) else None


def _json_matrix(m: np.ndarray) -> List[List[Optional[float]]]:
    return [[_json_number(v) for v in row] for row in np.asarray(m, dtype=float)]


def correlation_from_covariance(cov: np.ndarray) -> np.ndarray:
    """Correlations, with 0 off the diagonal wherever a coordinate is degenerate."""
    cov = np.asarray(cov, dtype=float)
    sd = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    positive = sd > 0
    corr = np.zeros_like(cov)
    scale = np.outer(np.where(positive, sd, 1.0), np.where(positive, sd, 1.0))
    mask = np.outer(positive, positive)
    corr[mask] = cov[mask] / scale[mask]
    np.fill_diagonal(corr, 1.0)
    return corr


@dataclass(frozen=True)
class MomentBundle:
    """Population quantities feeding the asymptotic formulas (∞ when not finite)."""
    mean: float
    median: float
    variance: float
    eta: float                   # E|X − median|
    density_at_median: float
    density: Callable[[float], float] = field(repr=False, compare=False, default=None)

    @property
    def finite_variance(self) -> bool:
        return math.isfinite(self.variance)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    def density_at(self, q: float) -> float:
        """f(F^{-1}(q))."""
        return self.density(q)

    def to_dict(self) -> dict:
        return {
            "mean": _json_number(self.mean),
            "median": _json_number(self.median),
            "variance": _json_number(self.variance),
            "eta": _json_number(self.eta),
            "density_at_median": _json_number(self.density_at_median),
        }


QUAD_LABELS = ["mean", "median", "remedian", "remedian_rank"]


@dataclass(frozen=True)
class QuadCovariance:
    """
    Limiting covariance of b^{k/2}(mean − μ, median − μ̄, remedian − μ̄, R/b^k − 1/2).
    Without a finite variance only the last three coordinates are kept.
    """
    matrix: np.ndarray
    labels: List[str]
    k: int
    sigma_sq: float
    eta: float
    f_med: float
    tau_sq: float

    @property
    def mean_available(self) -> bool:
        return self.labels[0] == "mean"

    def correlation(self) -> np.ndarray:
        return correlation_from_covariance(self.matrix)

    def entry(self, row: str, col: str) -> float:
        return float(self.matrix[self.labels.index(row), self.labels.index(col)])

    def to_dict(self) -> dict:
        out = {
            "labels": list(self.labels),
            "covariance": _json_matrix(self.matrix),
            "correlation": _json_matrix(self.correlation()),
            "tau_sq": self.tau_sq,
        }
        if not self.mean_available:
            out["mean_coordinate"] = "unavailable"
        return out

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass(frozen=True)
class MultiCovariance:
    """Predicted covariance of b^{k/2}(ℓ-remedian estimates − μ̃)."""
    matrix: np.ndarray
    Ks: List[int]
    N: int
    k: int
    ptildes: List[float]
    quantiles: List[float]       # μ̃_j = F^{-1}(p̃_j)
    densities: List[float]       # f(μ̃_j)
    betas: List[float]           # β_{K_j,N}(p̃_j)
    pibar: np.ndarray            # joint probabilities, diagonal 1/2

    def correlation(self) -> np.ndarray:
        return correlation_from_covariance(self.matrix)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "Ks": list(self.Ks),
            "k": self.k,
            "ptildes": list(self.ptildes),
            "quantiles": [_json_number(q) for q in self.quantiles],
            "densities": list(self.densities),
            "betas": list(self.betas),
            "pibar": _json_matrix(self.pibar),
            "covariance": _json_matrix(self.matrix),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)
