"""
Beta-law machinery behind every remedian distribution formula.

    beta_cdf(x, a, b)        regularized incomplete beta I_x(a, b)
    order_stat_cdf(x, j, n)  B_{j,n}: cdf of the j-th of n uniform order statistics
    psi(x, b, k)             k-fold composition of the Beta(m+1, m+1) cdf, b = 2m+1
    theta_b(b)               height of the Beta(m+1, m+1) density at 1/2
    ptilde(K, N)             the p with B_{K,N}(p) = 1/2
"""

import math
from typing import Union

import numpy as np
from scipy import optimize, special, stats

from errors import InvalidParameterError

ArrayLike = Union[float, np.ndarray]

PTILDE_XTOL = 1e-12
PTILDE_MAXITER = 200


# ── Parameter checks shared by the engines ──────────────────────────────────

def check_width(b: int) -> int:
    if isinstance(b, bool) or int(b) != b or b < 3 or b % 2 == 0:
        raise InvalidParameterError(f"width must be odd ≥ 3, got b={b}")
    return int(b)


def check_rows(k: int, minimum: int = 1) -> int:
    if isinstance(k, bool) or int(k) != k or k < minimum:
        raise InvalidParameterError(f"row count must be an integer ≥ {minimum}, got k={k}")
    return int(k)


def check_indices(N: int, Ks) -> list:
    """Validate a buffer size N and a strictly increasing index list within [1, N]."""
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise InvalidParameterError(f"buffer size must be a positive integer, got N={N}")
    Ks = [int(K) for K in Ks]
    if not Ks:
        raise InvalidParameterError("need at least one order-statistic index")
    if any(K < 1 or K > N for K in Ks):
        raise InvalidParameterError(f"indices must lie in [1, {N}], got {Ks}")
    if any(a >= b for a, b in zip(Ks, Ks[1:])):
        raise InvalidParameterError(f"indices must be strictly increasing, got {Ks}")
    return Ks


def _check_probability(x: ArrayLike, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InvalidParameterError(f"{name} must lie in [0, 1]")
    return arr


def _unwrap(arr: np.ndarray) -> ArrayLike:
    return float(arr) if arr.ndim == 0 else arr


# ── Incomplete beta and order statistics ────────────────────────────────────

def beta_cdf(x: ArrayLike, a: float, b: float) -> ArrayLike:
    """Regularized incomplete beta I_x(a, b) for x in [0, 1], a, b > 0."""
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise InvalidParameterError(f"beta shape parameters must be positive, got a={a}, b={b}")
    arr = _check_probability(x)
    return _unwrap(special.betainc(a, b, arr))


def beta_density(x: ArrayLike, a: float, b: float) -> ArrayLike:
    if not (a > 0 and b > 0):
        raise InvalidParameterError(f"beta shape parameters must be positive, got a={a}, b={b}")
    arr = _check_probability(x)
    return _unwrap(stats.beta.pdf(arr, a, b))


def order_stat_cdf(x: ArrayLike, j: int, n: int) -> ArrayLike:
    """B_{j,n}(x): the j-th smallest of n iid uniforms is Beta(j, n−j+1)."""
    if not 1 <= j <= n:
        raise InvalidParameterError(f"order statistic index must satisfy 1 ≤ j ≤ n, got j={j}, n={n}")
    return beta_cdf(x, j, n - j + 1)


def order_stat_density(x: ArrayLike, j: int, n: int) -> ArrayLike:
    """β_{j,n}(x) = d/dx B_{j,n}(x)."""
    if not 1 <= j <= n:
        raise InvalidParameterError(f"order statistic index must satisfy 1 ≤ j ≤ n, got j={j}, n={n}")
    return beta_density(x, j, n - j + 1)


# ── Ψ recursion and θ_b ─────────────────────────────────────────────────────

def psi(x: ArrayLike, b: int, k: int) -> ArrayLike:
    """Ψ_b^{(k)}(x): Ψ^{(0)} is the identity, Ψ^{(k)} = Ψ^{(1)} ∘ Ψ^{(k−1)}."""
    b = check_width(b)
    k = check_rows(k, minimum=0)
    arr = _check_probability(x)
    m = (b - 1) // 2
    for _ in range(k):
        arr = special.betainc(m + 1, m + 1, arr)
    return _unwrap(np.asarray(arr, dtype=float))


def theta_b(b: int) -> float:
    """b! / (2^{2m} m!²), evaluated in log space so large b does not overflow."""
    b = check_width(b)
    m = (b - 1) // 2
    log_value = special.gammaln(b + 1) - 2 * m * math.log(2.0) - 2 * special.gammaln(m + 1)
    return float(math.exp(log_value))


# ── Quantile targeted by a K-of-N buffer ────────────────────────────────────

def ptilde(K: int, N: int) -> float:
    """Unique p in (0, 1) with B_{K,N}(p) = 1/2, found by bisection."""
    if isinstance(K, bool) or isinstance(N, bool) or int(K) != K or int(N) != N or not 1 <= K <= N:
        raise InvalidParameterError(f"need integers 1 ≤ K ≤ N, got K={K}, N={N}")
    a, b = int(K), int(N) - int(K) + 1
    return float(optimize.bisect(
        lambda p: special.betainc(a, b, p) - 0.5,
        0.0, 1.0, xtol=PTILDE_XTOL, maxiter=PTILDE_MAXITER,
    ))
