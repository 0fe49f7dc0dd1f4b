from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lateral_vdw.errors import DomainError
from lateral_vdw.special import SERIES_SPLIT, bessel_k, bessel_k01


def oracle(n, x):
    with mpmath.workdps(40):
        return float(mpmath.besselk(n, mpmath.mpf(x)))


def rel_err(got, want):
    return abs(got - want) / abs(want)


def test_reference_values():
    assert bessel_k(2, 1.0) == pytest.approx(1.624838899, abs=5e-10)
    assert bessel_k(3, 1.0) == pytest.approx(7.101262825, abs=5e-10)


@pytest.mark.parametrize("n", range(6))
def test_against_high_precision_on_log_grid(n):
    xs = np.logspace(-4, math.log10(300.0), 100)
    got = bessel_k(n, xs)
    worst = max(rel_err(g, oracle(n, x)) for g, x in zip(got, xs))
    assert worst <= 1e-12


@given(st.floats(1e-5, 400.0), st.integers(0, 7))
def test_random_points_against_high_precision(x, n):
    assert rel_err(bessel_k(n, x), oracle(n, x)) <= 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_recurrence_residual(n):
    xs = np.linspace(0.1, 50.0, 400)
    lhs = bessel_k(n + 1, xs)
    resid = np.abs(lhs - bessel_k(n - 1, xs) - (2.0 * n / xs) * bessel_k(n, xs))
    assert np.all(resid <= 1e-11 * lhs)


@pytest.mark.parametrize("n,limit", [(1, 1.0), (2, 2.0), (3, 8.0), (4, 48.0)])
def test_small_argument_limit(n, limit):
    x = 1e-5
    assert x ** n * bessel_k(n, x) == pytest.approx(limit, rel=1e-8)


def test_k0_logarithmic_behaviour():
    x = 1e-8
    assert bessel_k(0, x) == pytest.approx(-math.log(x / 2) - 0.5772156649015329, rel=1e-12)


def test_continuity_at_regime_seam():
    below, above = np.nextafter(SERIES_SPLIT, 0.0), np.nextafter(SERIES_SPLIT, 3.0)
    for n in (0, 1):
        lo, hi = bessel_k(n, below), bessel_k(n, above)
        assert rel_err(lo, oracle(n, below)) <= 1e-13
        assert rel_err(hi, oracle(n, above)) <= 1e-13
        assert abs(hi - lo) <= 1e-13 * abs(lo)


def test_large_argument_decay_follows_asymptotic_series():
    xs = np.linspace(10.0, 200.0, 200)
    for n in (0, 1, 2, 3):
        scaled = bessel_k(n, xs) * np.exp(xs) * np.sqrt(xs)
        mu = 4.0 * n * n
        t = 1 / (8 * xs)
        series = math.sqrt(math.pi / 2) * (
            1 + (mu - 1) * t + (mu - 1) * (mu - 9) * t ** 2 / 2 + (mu - 1) * (mu - 9) * (mu - 25) * t ** 3 / 6
        )
        np.testing.assert_allclose(scaled, series, rtol=1e-3)
        assert np.all(np.diff(scaled) < 0) or n == 0


def test_k01_pair_matches_single_orders():
    xs = np.array([0.01, 1.0, 2.0, 7.5, 80.0])
    k0, k1 = bessel_k01(xs)
    np.testing.assert_array_equal(k0, bessel_k(0, xs))
    np.testing.assert_array_equal(k1, bessel_k(1, xs))


def test_scalar_in_scalar_out():
    assert isinstance(bessel_k(1, 2.5), float)
    assert bessel_k(1, np.array([2.5])).shape == (1,)


@pytest.mark.parametrize("x", [0.0, -1.0, math.nan, math.inf])
def test_rejects_bad_argument(x):
    with pytest.raises(DomainError):
        bessel_k(0, x)


@pytest.mark.parametrize("n", [-1, 1.5, "2"])
def test_rejects_bad_order(n):
    with pytest.raises(DomainError):
        bessel_k(n, 1.0)


def test_domain_error_is_value_error():
    with pytest.raises(ValueError):
        bessel_k(0, -2.0)


@pytest.mark.parametrize("n", range(5))
def test_monotonically_decreasing(n):
    xs = np.logspace(-6, math.log10(60.0), 2000)
    assert np.all(np.diff(bessel_k(n, xs)) < 0)
