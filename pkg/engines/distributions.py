"""
Population Models
------------------
The laws F the remedian is studied under, with cdf / quantile / pdf,
inverse-cdf sampling and the moment bundle used by the analytics engine.

Literals (see `parse_distribution`):
  uniform | normal:MU,SIGMA | pareto:ALPHA,BETA | beta:ALPHA | t:NU,SCALE,SHIFT
"""

from __future__ import annotations

import logging
import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy import integrate, stats

from errors import InvalidParameterError
from models.analytics_model import MomentBundle

_log = logging.getLogger("remedian.distributions")

_ETA_TOL = 1e-10
_OPEN_UNIT = 2.0 ** 53


def open_uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    """n uniforms strictly inside (0, 1), one 53-bit draw each."""
    return (rng.integers(0, 2 ** 53, size=n, dtype=np.int64) + 0.5) / _OPEN_UNIT


@dataclass(frozen=True)
class DistributionSpec(ABC):
    """Immutable continuous law; safe to share between workers."""

    family = "abstract"

    # ── Law ────────────────────────────────────────────────────────────────

    @cached_property
    def _law(self):
        return self._make_law()

    @abstractmethod
    def _make_law(self):
        ...

    @property
    @abstractmethod
    def literal(self) -> str:
        ...

    @property
    def support(self) -> Tuple[float, float]:
        lo, hi = self._law.support()
        return float(lo), float(hi)

    def cdf(self, x):
        """F(x); 0 below and 1 above the support."""
        out = self._law.cdf(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def pdf(self, x):
        out = self._law.pdf(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, p):
        arr = np.asarray(p, dtype=float)
        if np.any(~(arr > 0.0)) or np.any(~(arr < 1.0)):
            raise InvalidParameterError("quantile level must lie in (0, 1)")
        out = self._law.ppf(arr)
        return float(out) if np.ndim(out) == 0 else out

    def density_at(self, p: float) -> float:
        return self.pdf(self.quantile(p))

    # ── Sampling ───────────────────────────────────────────────────────────

    def sample_uniforms(self, u: np.ndarray) -> np.ndarray:
        return self._law.ppf(np.asarray(u, dtype=float))

    def sample_n(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.sample_uniforms(open_uniforms(rng, n))

    def sample(self, rng: np.random.Generator) -> float:
        return float(self.sample_n(rng, 1)[0])

    # ── Moments ────────────────────────────────────────────────────────────

    @property
    def median(self) -> float:
        return self.quantile(0.5)

    @abstractmethod
    def mean(self) -> float:
        ...

    @abstractmethod
    def variance(self) -> float:
        ...

    def eta(self) -> float:
        """E|X − median|."""
        return self.abs_deviation()

    def abs_deviation(self, about: Optional[float] = None) -> float:
        """E|X − c| = ∫_{−∞}^{c} F + ∫_{c}^{∞} (1 − F), by quadrature; c defaults to the median."""
        lo, hi = self.support
        m = self.median if about is None else float(about)
        if not math.isfinite(m):
            return math.inf
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                left, _ = integrate.quad(self._law.cdf, lo, m, epsabs=_ETA_TOL, epsrel=_ETA_TOL, limit=200)
                right, _ = integrate.quad(self._law.sf, m, hi, epsabs=_ETA_TOL, epsrel=_ETA_TOL, limit=200)
            except integrate.IntegrationWarning as exc:
                _log.warning("%s: absolute-deviation quadrature did not reach tolerance (%s)", self.literal, exc)
                left, _ = integrate.quad(self._law.cdf, lo, m, limit=200)
                right, _ = integrate.quad(self._law.sf, m, hi, limit=200)
        return left + right

    def moments(self) -> MomentBundle:
        m = self.median
        return MomentBundle(
            mean=self.mean(),
            median=m,
            variance=self.variance(),
            eta=self.eta(),
            density_at_median=self.pdf(m),
            density=self.density_at,
        )

    def __str__(self) -> str:
        return self.literal


@dataclass(frozen=True)
class Uniform01(DistributionSpec):
    family = "uniform"

    def _make_law(self):
        return stats.uniform(0.0, 1.0)

    @property
    def literal(self) -> str:
        return "uniform"

    def mean(self) -> float:
        return 0.5

    def variance(self) -> float:
        return 1.0 / 12.0

    def eta(self) -> float:
        return 0.25


@dataclass(frozen=True)
class Normal(DistributionSpec):
    mu: float = 0.0
    sigma: float = 1.0
    family = "normal"

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParameterError(f"normal sigma must be positive, got {self.sigma}")

    def _make_law(self):
        return stats.norm(self.mu, self.sigma)

    @property
    def literal(self) -> str:
        return f"normal:{self.mu:g},{self.sigma:g}"

    def mean(self) -> float:
        return self.mu

    def variance(self) -> float:
        return self.sigma ** 2

    def eta(self) -> float:
        # half-normal mean
        return self.sigma * math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class Pareto(DistributionSpec):
    """F(x) = 1 − (α/x)^β for x > α."""
    alpha: float = 1.0
    beta: float = 3.0
    family = "pareto"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise InvalidParameterError(f"pareto parameters must be positive, got {self.alpha}, {self.beta}")

    def _make_law(self):
        return stats.pareto(self.beta, scale=self.alpha)

    @property
    def literal(self) -> str:
        return f"pareto:{self.alpha:g},{self.beta:g}"

    @property
    def median(self) -> float:
        return self.alpha * 2.0 ** (1.0 / self.beta)

    def mean(self) -> float:
        if self.beta <= 1:
            return math.inf
        return self.alpha * self.beta / (self.beta - 1)

    def variance(self) -> float:
        if self.beta <= 2:
            return math.inf
        a, b = self.alpha, self.beta
        return a * a * b / ((b - 1) ** 2 * (b - 2))

    def eta(self) -> float:
        # (median − α)·β/(β − 1); equals σ(2^{1/β} − 1)√(β(β − 2)) when β > 2
        if self.beta <= 1:
            return math.inf
        return (self.median - self.alpha) * self.beta / (self.beta - 1)


@dataclass(frozen=True)
class BetaSym(DistributionSpec):
    alpha: float = 1.0
    family = "beta"

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidParameterError(f"beta alpha must be positive, got {self.alpha}")

    def _make_law(self):
        return stats.beta(self.alpha, self.alpha)

    @property
    def literal(self) -> str:
        return f"beta:{self.alpha:g}"

    @property
    def median(self) -> float:
        return 0.5

    def mean(self) -> float:
        return 0.5

    def variance(self) -> float:
        return 1.0 / (4.0 * (2.0 * self.alpha + 1.0))


@dataclass(frozen=True)
class ScaledT(DistributionSpec):
    """Law of scale·T_ν + shift."""
    nu: float = 3.0
    scale: float = 1.0
    shift: float = 0.0
    family = "t"

    def __post_init__(self):
        if not (self.nu > 0 and self.scale > 0):
            raise InvalidParameterError(f"t parameters need nu > 0 and scale > 0, got {self.nu}, {self.scale}")

    def _make_law(self):
        return stats.t(self.nu, loc=self.shift, scale=self.scale)

    @property
    def literal(self) -> str:
        return f"t:{self.nu:g},{self.scale:g},{self.shift:g}"

    @property
    def median(self) -> float:
        return self.shift

    def mean(self) -> float:
        return self.shift if self.nu > 1 else math.inf

    def variance(self) -> float:
        if self.nu <= 2:
            return math.inf
        return self.scale ** 2 * self.nu / (self.nu - 2)

    def eta(self) -> float:
        if self.nu <= 1:
            return math.inf
        return self.abs_deviation()


# ── Literal parsing ────────────────────────────────────────────────────────

_FAMILIES = {
    "uniform": (Uniform01, 0),
    "normal": (Normal, 2),
    "pareto": (Pareto, 2),
    "beta": (BetaSym, 1),
    "t": (ScaledT, 3),
}


def parse_distribution(literal: str) -> DistributionSpec:
    """'normal:0,1' → Normal(0, 1); see the module docstring for the grammar."""
    text = (literal or "").strip().lower()
    name, _, rest = text.partition(":")
    if name not in _FAMILIES:
        raise InvalidParameterError(
            f"unknown distribution {literal!r}; expected one of {', '.join(_FAMILIES)}")
    cls, arity = _FAMILIES[name]
    parts = [p for p in rest.split(",") if p.strip()] if rest else []
    if len(parts) != arity:
        raise InvalidParameterError(f"{name} takes {arity} parameter(s), got {len(parts)} in {literal!r}")
    try:
        params = [float(p) for p in parts]
    except ValueError:
        raise InvalidParameterError(f"non-numeric parameter in {literal!r}") from None
    if not all(math.isfinite(p) for p in params):
        raise InvalidParameterError(f"parameters must be finite in {literal!r}")
    return cls(*params)

