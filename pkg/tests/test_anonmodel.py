import io
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from rcbdc.anonmodel import (achieved_k, density_value_walk, gammainc_lower, gammainc_upper,
                             linear_fit, poisson_pmf, prob_at_least, simulate_waiting,
                             simulate_window_counts, waiting_cdf, waiting_pdf, waiting_quantile)


def test_pmf_examples():
    assert poisson_pmf(1.0, 2.0, 0) == pytest.approx(math.exp(-2), rel=1e-14)
    assert sum(poisson_pmf(0.7, 10.0, k) for k in range(200)) == pytest.approx(1.0, abs=1e-12)
    assert poisson_pmf(1.0, 0.0, 0) == 1.0
    assert poisson_pmf(1.0, 0.0, 3) == 0.0
    with pytest.raises(ValueError):
        poisson_pmf(-1.0, 1.0, 0)


def test_prob_at_least():
    assert prob_at_least(1.0, 5.0, 0) == 1.0
    assert prob_at_least(0.0, 5.0, 1) == 0.0
    for k in (1, 5, 20):
        below = sum(poisson_pmf(1.0, 10.0, j) for j in range(k))
        assert prob_at_least(1.0, 10.0, k) == pytest.approx(1.0 - below, abs=1e-12)


def test_achieved_k():
    assert achieved_k(1.0, 100.0) == 80
    assert achieved_k(1.0, 4.0) == 0
    assert achieved_k(1.0, 1.0) == 0


@pytest.mark.parametrize("a", [0.5, 1, 2, 7.5, 30, 100, 250])
@pytest.mark.parametrize("x", [0.01, 0.5, 1, 5, 29, 31, 80, 100, 300])
def test_gammainc_matches_mpmath(a, x):
    want = float(mpmath.gammainc(a, 0, x, regularized=True))
    assert gammainc_lower(a, x) == pytest.approx(want, abs=1e-10)
    assert gammainc_lower(a, x) + gammainc_upper(a, x) == pytest.approx(1.0, abs=1e-12)


def test_k2_is_exponential():
    for z in (0.1, 1.0, 3.0):
        assert waiting_cdf(2.0, 2, z) == pytest.approx(1 - math.exp(-2.0 * z), abs=1e-13)
        assert waiting_pdf(2.0, 2, z) == pytest.approx(2.0 * math.exp(-2.0 * z), rel=1e-12)
    assert waiting_cdf(1.0, 1, 0.0) == 1.0
    assert waiting_quantile(1.0, 1, 0.5) == 0.0


@pytest.mark.parametrize("lam,k", [(1.0, 2), (0.5, 10), (5.0, 40)])
def test_density_mean_and_quantile(lam, k):
    mean, _ = integrate.quad(lambda z: z * waiting_pdf(lam, k, z), 0, np.inf)
    assert mean == pytest.approx((k - 1) / lam, abs=1e-6)
    for p in (0.1, 0.5, 0.99):
        z = waiting_quantile(lam, k, p)
        assert waiting_cdf(lam, k, z) == pytest.approx(p, abs=1e-10)
        assert z == pytest.approx(stats.gamma.ppf(p, k - 1, scale=1 / lam), rel=1e-8)


@pytest.mark.parametrize("prob", [0.0, 1.0, -0.1, 1.5])
def test_quantile_rejects_bad_probability(prob):
    with pytest.raises(ValueError):
        waiting_quantile(1.0, 5, prob)


def test_simulation_k2_mean_and_shape():
    sim = simulate_waiting(1.0, 20, 40_000, seed=3)
    assert sim.mean_wait[1] == pytest.approx(1.0, abs=0.02)
    assert np.all(sim.samples[:, 0] == 0)
    d = stats.kstest(sim.samples[:, 19], lambda z: stats.gamma.cdf(z, 19)).statistic
    assert d < 0.01
    buf = io.StringIO()
    sim.to_csv(buf)
    assert buf.getvalue().startswith("k,mean_wait,p50,p999\n")
    assert len(buf.getvalue().splitlines()) == 21


def test_waits_add_up():
    # wait to k + j is the wait to k plus an independent wait of j more arrivals
    sim = simulate_waiting(1.0, 31, 20_000, seed=9)
    extra = sim.samples[:, 30] - sim.samples[:, 10]
    assert stats.kstest(extra, lambda z: stats.gamma.cdf(z, 20)).statistic < 0.015


def test_seed_reproducible():
    a = simulate_waiting(2.0, 10, 500, seed=5).samples
    b = simulate_waiting(2.0, 10, 500, seed=5).samples
    c = simulate_waiting(2.0, 10, 500, seed=6).samples
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_window_counts_moments():
    counts = simulate_window_counts(0.5, 40.0, 20_000, seed=1)
    assert counts.mean() == pytest.approx(20.0, rel=0.02)
    assert counts.var() == pytest.approx(20.0, rel=0.05)


def test_linear_fit_and_walk():
    slope, intercept, r2 = linear_fit([0, 1, 2, 3], [1, 3, 5, 7])
    assert (slope, intercept, r2) == pytest.approx((2.0, 1.0, 1.0))
    walk = density_value_walk(2.0, 20_000, seed=0)
    assert walk[-1] / len(walk) == pytest.approx(1 - math.exp(-2.0), rel=0.02)


@settings(max_examples=50)
@given(st.floats(0.1, 10), st.integers(2, 60), st.floats(0.01, 0.99))
def test_quantile_inverts_cdf(lam, k, p):
    assert waiting_cdf(lam, k, waiting_quantile(lam, k, p)) == pytest.approx(p, abs=1e-9)


@given(st.floats(0.1, 5), st.floats(0.1, 50), st.integers(0, 60))
def test_tail_is_monotone_in_k(lam, T, k):
    assert prob_at_least(lam, T, k + 1) <= prob_at_least(lam, T, k) + 1e-15
