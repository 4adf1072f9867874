"""
Remedian Analytics
-------------------
Closed-form and asymptotic quantities of the remedian and the ℓ-remedian:

  breakdown points     (⌈b/2⌉/b)^k, chains, K-of-N buffers
  variance factors     τ_k² = (π/2)^{k−1}, rank moments, Ψ-based exact cdf
  joint limits         4×4 (mean, median, remedian, rank) covariance and
                       correlations, location-difference variances
  efficiency           AREs against the median and the mean
  several quantiles    component Σ, Dirichlet joint probabilities, ℓ×ℓ covariance
                       and its row-by-row arcsin alternative

All functions are pure.
"""

import logging
import math
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np
from scipy import integrate, special, stats

from engines.distributions import DistributionSpec
from engines.special import (
    check_indices,
    check_rows,
    check_width,
    order_stat_density,
    psi,
    ptilde,
)
from errors import InfeasibleMatrixError, InvalidParameterError
from models.analytics_model import QUAD_LABELS, MultiCovariance, QuadCovariance, correlation_from_covariance

_log = logging.getLogger("remedian.analytics")

_PIBAR_TOL = 1e-8
_FEASIBILITY_TOL = 1e-12


# ── Breakdown ──────────────────────────────────────────────────────────────

def breakdown_point(k: int, b: int) -> Fraction:
    """ε*(k, b) = (⌈b/2⌉/b)^k."""
    k, b = check_rows(k), check_width(b)
    return Fraction((b + 1) // 2, b) ** k


def chain_breakdown(params: Sequence[Tuple[int, int]]) -> Fraction:
    """Product of the stage breakdown points of an iterated remedian."""
    if not params:
        raise InvalidParameterError("a chain needs at least one (k, b) stage")
    out = Fraction(1)
    for k, b in params:
        out *= breakdown_point(k, b)
    return out


def central_fraction(k: int, b: int) -> float:
    """Share of central inputs the estimate is guaranteed to lie among."""
    return float(1 - 2 * breakdown_point(k, b))


# ── Variance factors and the rank ──────────────────────────────────────────

def tau_sq(k: int) -> float:
    """(π/2)^{k−1}: variance inflation of the remedian over the median."""
    k = check_rows(k)
    return (math.pi / 2.0) ** (k - 1)


def tau_bar_sq(k: int) -> float:
    return tau_sq(k) - 1.0


def chain_tau_sq(params: Sequence[Tuple[int, int]]) -> float:
    """(π/2)^{Σk_j − 1} for an iterated remedian."""
    return (math.pi / 2.0) ** (sum(check_rows(k) for k, _ in params) - 1)


def rank_normal_approx(k: int, b: int) -> Tuple[float, float]:
    """Large-b mean and variance of the remedian rank R_{k,b}."""
    k, b = check_rows(k), check_width(b)
    n = b ** k
    return (n + 1) / 2.0, n * tau_bar_sq(k) / 4.0


def rank_moments(k: int, b: int) -> Tuple[float, float]:
    """Large-b mean and variance of |R_{k,b} − (b^k+1)/2| (half-normal limit)."""
    k, b = check_rows(k), check_width(b)
    n = float(b) ** k
    excess = tau_bar_sq(k)
    mean_abs_dev = math.sqrt(n * excess / (2.0 * math.pi))
    var_abs_dev = n * (1.0 - 2.0 / math.pi) * excess / 4.0
    return mean_abs_dev, var_abs_dev


def remedian_cdf(x, F: DistributionSpec, b: int, k: int):
    """Exact Pr(remedian ≤ x) = Ψ_b^{(k)}(F(x)) for iid continuous inputs."""
    return psi(F.cdf(x), b, k)


# ── Univariate variances ───────────────────────────────────────────────────

def _density_at_median(F: DistributionSpec) -> float:
    f = F.pdf(F.median)
    if not (f > 0 and math.isfinite(f)):
        raise InvalidParameterError(f"{F}: density at the median must be positive and finite")
    return f


def median_clt_variance(F: DistributionSpec) -> float:
    """Limit variance of b^{k/2}(sample median − μ̄): 1/(4 f(μ̄)²)."""
    return 1.0 / (4.0 * _density_at_median(F) ** 2)


def remedian_variance(F: DistributionSpec, k: int) -> float:
    """Limit variance of b^{k/2}(remedian − μ̄): τ_k²/(4 f(μ̄)²)."""
    return tau_sq(k) * median_clt_variance(F)


# ── Joint limit of mean, median, remedian and rank ─────────────────────────

def quad_covariance(F: DistributionSpec, k: int) -> QuadCovariance:
    """
    D Σ D with Σ = [[σ², η, η, 0], [η, 1, 1, 0], [η, 1, τ², τ̄²], [0, 0, τ̄², τ̄²]]
    and D = diag(1, 2f(μ̄), 2f(μ̄), 2)^{-1}. Infinite variance keeps the last
    three coordinates only.
    """
    t2 = tau_sq(k)
    tb = t2 - 1.0
    moments = F.moments()
    f = _density_at_median(F)
    sigma_sq, eta = moments.variance, moments.eta
    sigma = np.array([
        [sigma_sq, eta, eta, 0.0],
        [eta, 1.0, 1.0, 0.0],
        [eta, 1.0, t2, tb],
        [0.0, 0.0, tb, tb],
    ]) if moments.finite_variance else None
    d = np.array([1.0, 1.0 / (2.0 * f), 1.0 / (2.0 * f), 0.5])
    if sigma is not None:
        matrix = d[:, None] * sigma * d[None, :]
        labels = list(QUAD_LABELS)
    else:
        _log.info("%s has infinite variance; mean coordinate unavailable", F)
        sub = np.array([[1.0, 1.0, 0.0], [1.0, t2, tb], [0.0, tb, tb]])
        matrix = d[1:, None] * sub * d[None, 1:]
        labels = list(QUAD_LABELS[1:])
    return QuadCovariance(
        matrix=matrix, labels=labels, k=k, sigma_sq=sigma_sq,
        eta=eta, f_med=f, tau_sq=t2,
    )


def correlation_matrix(F: DistributionSpec, k: int) -> np.ndarray:
    """
    Limit correlations; with p_k = (2/π)^{k−1} the entries are η/σ, η√p_k/σ,
    √p_k and √(1−p_k), and the rank is uncorrelated with mean and median.
    """
    return quad_covariance(F, k).correlation()


def locdiff_variances(F: DistributionSpec, k: int) -> Tuple[float, float, float]:
    """
    Limit variances of b^{k/2} times (remedian − median),
    (median − mean) − (μ̄ − μ) and (remedian − mean) − (μ̄ − μ).
    """
    t2 = tau_sq(k)
    iota = 1.0 / _density_at_median(F)
    moments = F.moments()
    v_rem_med = iota * iota * (t2 - 1.0) / 4.0
    if not moments.finite_variance:
        return v_rem_med, math.inf, math.inf
    base = moments.variance - iota * moments.eta
    return v_rem_med, base + iota * iota / 4.0, base + iota * iota * t2 / 4.0


def locdiff_rate(F: DistributionSpec, k: int) -> float:
    """C_k = τ̄_k/(2 f(μ̄)): scale of the remedian's error against the sample median."""
    return math.sqrt(tau_bar_sq(k)) / (2.0 * _density_at_median(F))


# ── Asymptotic relative efficiency ─────────────────────────────────────────

def are_remedian_vs_median(k: int) -> float:
    return (2.0 / math.pi) ** (check_rows(k) - 1)


def are_remedian_vs_mean(F: DistributionSpec, k: int) -> float:
    """4 (2/π)^{k−1} f(μ̄)² σ²; infinite when σ² is."""
    moments = F.moments()
    if not moments.finite_variance:
        return math.inf
    f = _density_at_median(F)
    return 4.0 * are_remedian_vs_median(k) * f * f * moments.variance


def are_median_vs_mean(F: DistributionSpec) -> float:
    return are_remedian_vs_mean(F, 1)


def are_examples(family: str, params: Sequence[float], k: int) -> float:
    """
    Efficiency of the remedian against the mean for the symmetric families:
      beta   (α,)    (2/π)^{k−1} / [16^{α−1} (2α+1) B(α,α)²]
      t      (ν,)    4 (2/π)^{k−1} / [(ν−2) B(ν/2, 1/2)²], ∞ for ν ≤ 2
      normal ()      (2/π)^k
    """
    factor = are_remedian_vs_median(k)
    family = family.lower()
    if family == "beta":
        (alpha,) = params
        if not alpha > 0:
            raise InvalidParameterError(f"beta alpha must be positive, got {alpha}")
        log_den = (alpha - 1.0) * math.log(16.0) + math.log(2.0 * alpha + 1.0) + 2.0 * special.betaln(alpha, alpha)
        return factor * math.exp(-log_den)
    if family == "t":
        nu = params[0]
        if not nu > 0:
            raise InvalidParameterError(f"t degrees of freedom must be positive, got {nu}")
        if nu <= 2:
            return math.inf
        return 4.0 * factor / ((nu - 2.0) * special.beta(nu / 2.0, 0.5) ** 2)
    if family == "normal":
        return factor * (2.0 / math.pi)
    raise InvalidParameterError(f"no efficiency formula for family {family!r}")


# ── Several quantiles at once ──────────────────────────────────────────────

def orthant_probability(rho: float) -> float:
    """Pr(Z₁ ≤ 0, Z₂ ≤ 0) for a standard bivariate normal with correlation ρ."""
    if not -1.0 <= rho <= 1.0:
        raise InvalidParameterError(f"correlation must lie in [-1, 1], got {rho}")
    return 0.25 + math.asin(rho) / (2.0 * math.pi)


def component_sigma(p: Sequence[float], pi: np.ndarray) -> np.ndarray:
    """Σ_{jl} = π_{jl} − p_j p_l after checking π is a feasible joint-probability matrix."""
    p = np.asarray(p, dtype=float)
    pi = np.asarray(pi, dtype=float)
    ell = p.shape[0]
    if pi.shape != (ell, ell):
        raise InvalidParameterError(f"joint matrix must be {ell}×{ell}, got {pi.shape}")
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise InvalidParameterError("component probabilities must lie in (0, 1)")
    if not np.allclose(pi, pi.T, atol=_FEASIBILITY_TOL, rtol=0.0):
        raise InfeasibleMatrixError("joint probability matrix is not symmetric")
    if not np.allclose(np.diag(pi), p, atol=_FEASIBILITY_TOL, rtol=0.0):
        raise InfeasibleMatrixError("diagonal of the joint matrix must equal the marginals")
    lower = np.maximum(0.0, p[:, None] + p[None, :] - 1.0)
    upper = np.minimum(p[:, None], p[None, :])
    if np.any(pi < lower - _FEASIBILITY_TOL) or np.any(pi > upper + _FEASIBILITY_TOL):
        raise InfeasibleMatrixError("joint probabilities violate the Fréchet bounds")
    return pi - np.outer(p, p)


def dirichlet_pibar(K_low: int, K_high: int, N: int, p_low: float, p_high: float) -> float:
    """
    Pr(Y₁ ≤ p_low, Y₁ + Y₂ ≤ p_high) for Y ~ Dirichlet(K_low, K_high − K_low, N + 1 − K_high),
    i.e. the joint probability that the K_low-th and K_high-th of N uniforms sit
    below p_low and p_high. Y₁ is Beta(K_low, N + 1 − K_low) and, given Y₁ = y,
    Y₂/(1 − y) is Beta(K_high − K_low, N + 1 − K_high).
    """
    if K_low == K_high:
        return float(p_low)
    if not (1 <= K_low < K_high <= N):
        raise InvalidParameterError(f"need 1 ≤ K_low < K_high ≤ N, got {K_low}, {K_high}, {N}")
    if not (0.0 < p_low < 1.0 and 0.0 < p_high < 1.0):
        raise InvalidParameterError("probabilities must lie in (0, 1)")
    a1, a2, a3 = K_low, K_high - K_low, N + 1 - K_high
    marginal = stats.beta(a1, a2 + a3)

    def integrand(y: float) -> float:
        z = min(max((p_high - y) / (1.0 - y), 0.0), 1.0)
        return marginal.pdf(y) * special.betainc(a2, a3, z)

    upper = min(p_low, p_high)
    value, _ = integrate.quad(integrand, 0.0, upper, epsabs=_PIBAR_TOL, limit=200)
    return float(value)


def multi_covariance(F: DistributionSpec, N: int, Ks: Sequence[int], k: int, b: int) -> MultiCovariance:
    """
    Predicted covariance of b^{k/2}(ℓ-remedian estimates − μ̃):
    τ_k² D Σ D with D = diag(β_{K_j,N}(p̃_j) f(μ̃_j))^{-1}, Σ_jj = 1/4 and
    Σ_jl = π̄_jl − 1/4. Remedian j sees B_{K_j,N}∘F, whose median is μ̃_j.
    """
    check_width(b)
    Ks = check_indices(N, Ks)
    ps = [ptilde(K, N) for K in Ks]
    quantiles = [F.quantile(p) for p in ps]
    densities = [F.pdf(q) for q in quantiles]
    for K, f in zip(Ks, densities):
        if not (f > 0 and math.isfinite(f)):
            raise InvalidParameterError(f"{F}: density at the K={K} target quantile must be positive")
    betas = [float(order_stat_density(p, K, N)) for K, p in zip(Ks, ps)]
    ell = len(Ks)
    pibar = np.zeros((ell, ell))
    for j in range(ell):
        pibar[j, j] = 0.5
        for l in range(j + 1, ell):
            pibar[j, l] = pibar[l, j] = dirichlet_pibar(Ks[j], Ks[l], N, ps[j], ps[l])
    sigma = pibar - 0.25
    d = 1.0 / (np.asarray(betas) * np.asarray(densities))
    matrix = tau_sq(k) * d[:, None] * sigma * d[None, :]
    return MultiCovariance(
        matrix=matrix, Ks=list(Ks), N=N, k=k, ptildes=ps, quantiles=quantiles,
        densities=densities, betas=betas, pibar=pibar,
    )


def component_covariance(rho: float, k: int) -> np.ndarray:
    """
    Predicted covariance of b^{k/2} times the per-component remedians of a
    standard bivariate normal stream with correlation ρ.
    """
    pi_tilde = orthant_probability(rho)
    sigma = component_sigma([0.5, 0.5], np.array([[0.5, pi_tilde], [pi_tilde, 0.5]]))
    f0 = stats.norm.pdf(0.0)
    return tau_sq(k) * sigma / (f0 * f0)


def arcsin_cascade(corr, steps: int):
    """Apply c ↦ (2/π) arcsin(c) elementwise `steps` times."""
    c = np.clip(np.asarray(corr, dtype=float), -1.0, 1.0)
    for _ in range(steps):
        c = (2.0 / math.pi) * np.arcsin(c)
    return c


def row_arcsin_covariance(matrix: np.ndarray, k: int) -> np.ndarray:
    """
    Row-by-row alternative to the (π/2)^{k−1} scaling of a k-row prediction.
    Each row above the first takes medians of asymptotically normal inputs, so
    the pairwise correlation passes through (2/π) arcsin once per extra row.
    The diagonal is kept as is. At k = 1 the matrix comes back unchanged.
    """
    k = check_rows(k)
    matrix = np.asarray(matrix, dtype=float)
    sd = np.sqrt(np.diag(matrix))
    out = arcsin_cascade(correlation_from_covariance(matrix), k - 1) * np.outer(sd, sd)
    np.fill_diagonal(out, np.diag(matrix))
    return out
