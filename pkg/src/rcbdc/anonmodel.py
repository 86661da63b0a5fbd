"""Poisson arrivals, achieved anonymity, and the gamma waiting time to reach k.

Arrivals form a Poisson process of rate lambda.  A fixed aggregation window
of length T collects K ~ Poisson(lambda T) transactions.  With a target of
k-anonymity, the first transaction waits for k' = k - 1 further arrivals, a
sum of k' exponential inter-arrival times, i.e. Gamma(shape k', rate lambda).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 100_000


def log_poisson_pmf(lam, T, k):
    mu = lam * T
    if mu == 0:
        return 0.0 if k == 0 else -math.inf
    return k * math.log(mu) - mu - math.lgamma(k + 1)


def poisson_pmf(lam, T, k):
    """P(K = k) for K ~ Poisson(lam T), evaluated in log space."""
    if lam < 0 or T < 0 or k < 0:
        raise ValueError("lam, T and k must be non-negative")
    return math.exp(log_poisson_pmf(lam, T, k))


def _log_prefactor(a, x):
    return a * math.log(x) - x - math.lgamma(a)


def _lower_series(a, x):
    term = total = 1.0 / a
    n = a
    for _ in range(_MAX_ITER):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(_log_prefactor(a, x))
    raise ArithmeticError("incomplete gamma series did not converge")


def _upper_continued_fraction(a, x):
    # modified Lentz evaluation of the Legendre continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(_log_prefactor(a, x)) * h
    raise ArithmeticError("incomplete gamma continued fraction did not converge")


def gammainc_lower(a, x):
    """Regularized lower incomplete gamma P(a, x)."""
    if a <= 0:
        raise ValueError("shape must be positive")
    if x <= 0:
        return 0.0
    if x < a:
        return _lower_series(a, x)
    return 1.0 - _upper_continued_fraction(a, x)


def gammainc_upper(a, x):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if a <= 0:
        raise ValueError("shape must be positive")
    if x <= 0:
        return 1.0
    if x < a:
        return 1.0 - _lower_series(a, x)
    return _upper_continued_fraction(a, x)


def prob_at_least(lam, T, k):
    """P(K >= k): chance a window of length T reaches k-anonymity."""
    if k <= 0:
        return 1.0
    mu = lam * T
    if mu == 0:
        return 0.0
    # Poisson upper tail equals the regularized lower incomplete gamma
    return gammainc_lower(k, mu)


def achieved_k(lam, T):
    """Conservative anonymity of a window: floor(max(mean - 2 sd, 0))."""
    mu = lam * T
    return math.floor(max(mu - 2.0 * math.sqrt(mu), 0.0))


def _check_k(k):
    if k < 1:
        raise ValueError("k must be at least 1")


def waiting_pdf(lam, k, z):
    _check_k(k)
    a = k - 1
    if a == 0 or z < 0:
        return 0.0
    if z == 0:
        return lam if a == 1 else 0.0
    return lam * math.exp(a * math.log(lam * z) - lam * z - math.log(lam * z) - math.lgamma(a))


def waiting_cdf(lam, k, z):
    """P(Z <= z) for the wait to k-anonymity; k = 1 means no wait at all."""
    _check_k(k)
    if z < 0:
        return 0.0
    if k == 1:
        return 1.0
    return gammainc_lower(k - 1, lam * z)


def waiting_quantile(lam, k, prob):
    """Smallest z with waiting_cdf(z) >= prob, by bracketed root finding."""
    if not 0.0 < prob < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {prob}")
    _check_k(k)
    if k == 1:
        return 0.0
    hi = max(1.0, (k - 1) / lam)
    while waiting_cdf(lam, k, hi) < prob:
        hi *= 2.0
    return brentq(lambda z: waiting_cdf(lam, k, z) - prob, 0.0, hi, xtol=1e-300, rtol=1e-12,
                  maxiter=500)


def exponential_samples(rng, lam, size):
    """Inverse-transform draws -ln(1 - U) / lam with U ~ Uniform[0, 1)."""
    return -np.log1p(-rng.random(size)) / lam


@dataclass
class WaitingSimulation:
    lam: float
    ks: np.ndarray
    mean_wait: np.ndarray
    p50: np.ndarray
    p999: np.ndarray
    # samples[:, i] are waits to reach k = ks[i]
    samples: np.ndarray

    def rows(self):
        return [(int(k), float(m), float(a), float(b))
                for k, m, a, b in zip(self.ks, self.mean_wait, self.p50, self.p999)]

    def to_csv(self, sink):
        sink.write("k,mean_wait,p50,p999\n")
        for k, m, a, b in self.rows():
            sink.write(f"{k},{m:.6f},{a:.6f},{b:.6f}\n")


def simulate_waiting(lam, k_max, trials, seed):
    """Monte Carlo waits to reach k = 1..k_max over ``trials`` independent runs."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if k_max < 1 or lam <= 0:
        raise ValueError("need k_max >= 1 and lam > 0")
    rng = np.random.default_rng(seed)
    gaps = exponential_samples(rng, lam, (trials, k_max - 1))
    waits = np.concatenate([np.zeros((trials, 1)), np.cumsum(gaps, axis=1)], axis=1)
    ks = np.arange(1, k_max + 1)
    return WaitingSimulation(
        lam, ks, waits.mean(axis=0),
        np.quantile(waits, 0.5, axis=0), np.quantile(waits, 0.999, axis=0), waits,
    )


def simulate_window_counts(lam, T, windows, seed):
    """Arrival counts in ``windows`` independent windows of length T, from exponential gaps."""
    rng = np.random.default_rng(seed)
    mu = lam * T
    width = int(mu + 10 * math.sqrt(mu) + 10)
    counts = np.empty(windows, dtype=np.int64)
    for start in range(0, windows, 4096):
        n = min(4096, windows - start)
        times = np.cumsum(exponential_samples(rng, lam, (n, width)), axis=1)
        while np.any(times[:, -1] <= T):
            extra = np.cumsum(exponential_samples(rng, lam, (n, width)), axis=1) + times[:, -1:]
            times = np.concatenate([times, extra], axis=1)
        counts[start:start + n] = (times <= T).sum(axis=1)
    return counts


def linear_fit(x, y):
    """Least-squares line; returns (slope, intercept, r_squared)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    return float(slope), float(intercept), float(1.0 - np.sum(resid ** 2) / ss_tot)


def density_value_walk(lam, steps, seed):
    """Cumulative sum of lam * exp(-lam U) for uniform U.

    This accumulates density values at uniform points rather than sampling
    exponential gaps; it grows linearly too, but with slope
    (1 - exp(-lam)) instead of 1 / lam.  Kept to compare against
    ``simulate_waiting``.
    """
    rng = np.random.default_rng(seed)
    return np.cumsum(lam * np.exp(-lam * rng.random(steps)))
