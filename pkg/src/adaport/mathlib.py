"""Bernoulli KL divergence, its upper inverse, Beta sampling and Beta/Binomial CDFs.

All logarithms are natural, so divergences are in nats.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = [
    "kl_bernoulli",
    "kl_bernoulli_vec",
    "kl_upper_inverse",
    "sample_beta",
    "beta_cdf",
    "binomial_cdf",
]

_INVERSE_TOL = 1e-12
# Above this many trials binomial terms are summed in log space.
_LOG_SPACE_N = 500


def _check_prob(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def _xlogy_ratio(a: float, b: float) -> float:
    # a * log(a / b) with 0 * log(0 / b) = 0 and a > 0, b = 0 -> inf
    if a == 0.0:
        return 0.0
    if b == 0.0:
        return math.inf
    return a * math.log(a / b)


def kl_bernoulli(p: float, q: float) -> float:
    """KL divergence d(p, q) between Bernoulli(p) and Bernoulli(q).

    Returns ``inf`` when q is 0 or 1 and p differs from it.
    """
    p = _check_prob("p", p)
    q = _check_prob("q", q)
    if p == q:
        return 0.0
    # rounding can push nearly-equal arguments slightly below zero
    return max(0.0, _xlogy_ratio(p, q) + _xlogy_ratio(1.0 - p, 1.0 - q))


def kl_bernoulli_vec(p, q) -> np.ndarray:
    """Elementwise d(p, q) for arrays, with the same conventions as :func:`kl_bernoulli`.

    No domain checks; callers pass values already in [0, 1].
    """
    p, q = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = special.xlogy(p, p) - special.xlogy(p, q)
        out = out + special.xlogy(1 - p, 1 - p) - special.xlogy(1 - p, 1 - q)
    out = np.where(p == q, 0.0, np.maximum(out, 0.0))
    return np.where(np.isnan(out), np.inf, out)


def kl_upper_inverse(p: float, target: float) -> float:
    """Largest q in [p, 1] with d(p, q) <= target, found by bisection.

    Since d(p, .) is increasing on [p, 1] this is the root of
    d(p, q) = target, and 1 once the target exceeds every attainable value.
    The returned point is the upper bracket after bisecting to 1e-12.
    """
    p = _check_prob("p", p)
    if p >= 1.0:
        raise ValueError("p must be < 1")
    target = float(target)
    if not target >= 0.0:
        raise ValueError(f"target must be nonnegative, got {target}")
    if target == 0.0:
        return p
    lo, hi = p, 1.0
    while hi - lo > _INVERSE_TOL:
        mid = 0.5 * (lo + hi)
        if kl_bernoulli(p, mid) > target:
            hi = mid
        else:
            lo = mid
    return hi


def sample_beta(a: float, b: float, rng: np.random.Generator) -> float:
    """One draw from Beta(a, b) using the caller's generator."""
    if not (a > 0 and b > 0):
        raise ValueError(f"Beta shapes must be positive, got a={a}, b={b}")
    return float(rng.beta(a, b))


def binomial_cdf(n: int, p: float, k: int) -> float:
    """P(Bin(n, p) <= k) by direct summation of the binomial terms."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    p = _check_prob("p", p)
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    if n <= _LOG_SPACE_N:
        q = 1.0 - p
        return math.fsum(math.comb(n, j) * p**j * q ** (n - j) for j in range(k + 1))
    log_p, log_q = math.log(p), math.log1p(-p)
    lg_n = math.lgamma(n + 1)
    terms = [
        lg_n - math.lgamma(j + 1) - math.lgamma(n - j + 1) + j * log_p + (n - j) * log_q
        for j in range(k + 1)
    ]
    top = max(terms)
    return min(1.0, math.exp(top) * math.fsum(math.exp(t - top) for t in terms))


def beta_cdf(a: int, b: int, y: float) -> float:
    """CDF of Beta(a, b) at y for integer shapes (regularised incomplete beta)."""
    if int(a) != a or int(b) != b or a < 1 or b < 1:
        raise ValueError(f"shapes must be integers >= 1, got a={a}, b={b}")
    y = _check_prob("y", y)
    return float(special.betainc(a, b, y))
