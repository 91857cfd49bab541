import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

from ehpower.utility import LogUtility, log_utility_gradient, log_utility_value, water_filling

U = LogUtility()


def test_value_examples():
    assert log_utility_value([0, 0], [3.1, 0.2]) == 0.0
    assert log_utility_value([1, 1], [math.e - 1, math.e - 1]) == pytest.approx(2.0, abs=1e-15)


def test_markov_state_value_high_precision():
    getcontext().prec = 40
    exact = (Decimal("2.125").ln() + Decimal("4").ln())
    assert abs(log_utility_value([2.5, 2.5], [0.45, 1.2]) - float(exact)) < 1e-14
    assert float(exact) == pytest.approx(2.1401, abs=1e-4)


def test_gradient_examples():
    np.testing.assert_array_equal(log_utility_gradient([0, 0], [4, 4]), [4, 4])
    np.testing.assert_allclose(log_utility_gradient([5, 0], [1, 2]), [1 / 6, 2], rtol=1e-15)


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(7)
    h = 1e-6
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        p = rng.uniform(0.01, 5, n)
        s = rng.uniform(0.01, 4, n)
        g = log_utility_gradient(p, s)
        fd = np.array([(log_utility_value(p + h * e, s) - log_utility_value(p - h * e, s)) / (2 * h)
                       for e in np.eye(n)])
        np.testing.assert_allclose(g, fd, rtol=1e-5)


def test_gradient_within_bounds():
    rng = np.random.default_rng(8)
    s = rng.uniform(0, 4, (5000, 2))
    p = rng.uniform(0, 5, (5000, 2))
    g = U.gradient(p, s)
    assert np.all(g >= 0) and np.all(g <= U.bounds([4.0, 4.0]))


def _simplex_points(rng, m, n, cap):
    return rng.dirichlet(np.ones(n + 1), m)[:, :n] * cap


def test_concavity():
    rng = np.random.default_rng(9)
    p, q = _simplex_points(rng, 20000, 2, 5.0), _simplex_points(rng, 20000, 2, 5.0)
    s = rng.uniform(0, 4, (20000, 2))
    a = rng.uniform(0, 1, (20000, 1))
    lhs = U.value(a * p + (1 - a) * q, s)
    rhs = a[:, 0] * U.value(p, s) + (1 - a[:, 0]) * U.value(q, s)
    assert np.all(lhs >= rhs - 1e-9)


def test_lipschitz():
    rng = np.random.default_rng(10)
    d = math.sqrt(32)
    p, q = _simplex_points(rng, 20000, 2, 5.0), _simplex_points(rng, 20000, 2, 5.0)
    s = rng.uniform(0, 4, (20000, 2))
    gap = np.abs(U.value(p, s) - U.value(q, s))
    assert np.all(gap <= d * np.linalg.norm(p - q, axis=1) + 1e-9)


def test_batch_shapes():
    p = np.zeros((3, 2))
    s = np.ones((3, 2))
    assert U.value(p, s).shape == (3,)
    assert U.gradient(p, s).shape == (3, 2)


class TestWaterFilling:
    def test_trivial(self):
        np.testing.assert_allclose(water_filling([1, 1], 2), [1, 1], atol=1e-10)
        np.testing.assert_allclose(water_filling([4, 0], 3), [3, 0], atol=1e-10)

    def test_degenerate(self):
        np.testing.assert_array_equal(water_filling([0, 0], 3), [0, 0])
        np.testing.assert_array_equal(water_filling([1, 2], 0), [0, 0])

    def test_against_grid(self):
        s = np.array([0.45, 1.2])
        res, K = 1e-3, 5000
        k1, k2 = np.meshgrid(np.arange(K + 1), np.arange(K + 1), indexing="ij", sparse=True)
        vals = np.log1p(k1 * res * s[0]) + np.log1p(k2 * res * s[1])
        vals = np.where(k1 + k2 <= K, vals, -np.inf)
        i, j = np.unravel_index(np.argmax(vals), vals.shape)
        grid = np.array([i, j]) * res
        p = water_filling(s, 5.0)
        assert np.max(np.abs(p - grid)) <= 2e-3
        # frozen: mu = (5 + 1/0.45 + 1/1.2) / 2
        np.testing.assert_allclose(p, [1.8055555555555556, 3.1944444444444446], atol=1e-9)

    def test_batch_and_kkt(self):
        rng = np.random.default_rng(12)
        s = rng.uniform(0, 4, (2000, 3))
        s[rng.random((2000, 3)) < 0.1] = 0.0
        cap = rng.uniform(0, 5, 2000)
        p = water_filling(s, cap)
        live = s.max(axis=1) > 0
        np.testing.assert_allclose(p.sum(axis=1)[live], cap[live], atol=1e-9)
        assert np.all(p >= 0)
        # active subbands share one marginal utility, inactive ones sit below it
        g = U.gradient(p, s)
        for gi, pi in zip(g[live], p[live]):
            on = pi > 1e-9
            if on.any():
                lam = gi[on].mean()
                assert np.allclose(gi[on], lam, rtol=1e-6)
                assert np.all(gi[~on] <= lam * (1 + 1e-6))
