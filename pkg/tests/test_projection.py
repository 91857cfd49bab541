import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ehpower.core import ParameterError
from ehpower.projection import (kkt_residual, project_capped_simplex, project_nonpositive_shift,
                                qp_oracle)


def dense_grid_argmin(x, cap, res):
    """Independent oracle: enumerate every grid point of the 2-d capped simplex."""
    K = int(round(cap / res))
    k1, k2 = np.meshgrid(np.arange(K + 1), np.arange(K + 1), indexing="ij")
    ok = k1 + k2 <= K
    pts = np.stack([k1[ok], k2[ok]], axis=1) * res
    return pts[np.argmin(np.sum((pts - x) ** 2, axis=1))]


@pytest.mark.parametrize("x, cap, expected", [
    ([0.5, 0.3], 5.0, [0.5, 0.3]),
    ([4.0, 4.0], 5.0, [2.5, 2.5]),
])
def test_trivial_examples(x, cap, expected):
    np.testing.assert_allclose(project_capped_simplex(x, cap), expected, atol=1e-12)


def test_derived_example_matches_grid_and_kkt():
    x = np.array([6.0, -1.0])
    # frozen from dense_grid_argmin(x, 5, 1e-3)
    assert np.allclose(dense_grid_argmin(x, 5.0, 1e-3), [5.0, 0.0], atol=1e-3)
    p = project_capped_simplex(x, 5.0)
    np.testing.assert_allclose(p, [5.0, 0.0], atol=1e-12)
    assert kkt_residual(x, p, 5.0) < 1e-9


def test_closed_form_shift_examples():
    np.testing.assert_array_equal(project_nonpositive_shift([1, 1], [-0.5, -2]), [0.5, 0.0])
    np.testing.assert_array_equal(project_nonpositive_shift([0, 0], [0, 0]), [0.0, 0.0])
    p = project_nonpositive_shift([2, 3], [-3, -1])
    np.testing.assert_array_equal(p, [0.0, 2.0])
    np.testing.assert_array_equal(project_capped_simplex([-1.0, 2.0], 5.0), p)
    np.testing.assert_allclose(qp_oracle([-1.0, 2.0], 5.0), p, atol=1e-3)


def test_closed_form_rejects_positive_shift():
    with pytest.raises(ParameterError):
        project_nonpositive_shift([1, 1], [0.1, -1])


@pytest.mark.parametrize("bad", [[np.nan, 1.0], [np.inf, 0.0]])
def test_non_finite_rejected(bad):
    with pytest.raises(ParameterError):
        project_capped_simplex(bad, 1.0)


def test_zero_cap_maps_to_origin():
    np.testing.assert_array_equal(project_capped_simplex([3.0, 1.0], 0.0), [0.0, 0.0])
    out = project_capped_simplex([[3.0, 1.0], [1.0, 1.0]], [0.0, 5.0])
    np.testing.assert_array_equal(out, [[0.0, 0.0], [1.0, 1.0]])


def test_batch_matches_rowwise():
    rng = np.random.default_rng(3)
    x = rng.normal(0, 4, (500, 5))
    caps = rng.uniform(0.1, 6, 500)
    batch = project_capped_simplex(x, caps)
    rows = np.array([project_capped_simplex(xi, c) for xi, c in zip(x, caps)])
    np.testing.assert_array_equal(batch, rows)


def test_ties_need_no_tiebreak():
    p = project_capped_simplex([3.0, 3.0, 3.0, -1.0], 3.0)
    np.testing.assert_allclose(p, [1.0, 1.0, 1.0, 0.0], atol=1e-15)


class TestQpOracle:
    def test_examples(self):
        np.testing.assert_allclose(qp_oracle([6.0, -1.0], 5.0), [5.0, 0.0], atol=1e-3)
        np.testing.assert_allclose(qp_oracle([0.0, 0.0], 5.0), [0.0, 0.0], atol=1e-3)
        np.testing.assert_allclose(qp_oracle([4.0, 4.0], 5.0), [2.5, 2.5], atol=1e-3)

    def test_rejects_large_n(self):
        with pytest.raises(ParameterError):
            qp_oracle(np.zeros(4), 1.0)

    def test_last_coordinate_shortcut_matches_full_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = rng.uniform(-1, 3, 2)
            np.testing.assert_allclose(qp_oracle(x, 2.0, 1e-2), dense_grid_argmin(x, 2.0, 1e-2))


# -- properties (trial counts as required for the projection suite) --------

def _random_inputs(rng, trials, n):
    x = rng.normal(0, 5, (trials, n)) * rng.uniform(0.1, 3, (trials, 1))
    caps = rng.uniform(0.05, 10, trials)
    return x, caps


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_idempotent_nonexpansive_kkt(n):
    rng = np.random.default_rng(100 + n)
    trials = 10_000
    x, caps = _random_inputs(rng, trials, n)
    y, _ = _random_inputs(rng, trials, n)
    px = project_capped_simplex(x, caps)
    py = project_capped_simplex(y, caps)
    assert np.max(np.abs(project_capped_simplex(px, caps) - px)) <= 1e-12
    gap = np.linalg.norm(px - py, axis=1) - np.linalg.norm(x - y, axis=1)
    assert np.all(gap <= 1e-12)
    worst = max(kkt_residual(xi, pi, c) for xi, pi, c in zip(x, px, caps))
    assert worst < 1e-9


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_closed_form_equivalence(n):
    rng = np.random.default_rng(200 + n)
    trials = 10_000
    caps = rng.uniform(0.05, 10, trials)
    p = rng.dirichlet(np.ones(n), trials) * (caps * rng.uniform(0, 1, trials))[:, None]
    p[rng.random(trials) < 0.2, 0] = 0.0
    b = -rng.exponential(1.0, (trials, n)) * (rng.random((trials, n)) < 0.8)
    np.testing.assert_array_equal(project_nonpositive_shift(p, b), project_capped_simplex(p + b, caps))


@pytest.mark.parametrize("n, trials, cap", [(2, 1000, 5.0), (3, 1000, 1.0)])
def test_grid_oracle_agreement(n, trials, cap):
    rng = np.random.default_rng(300 + n)
    worst = 0.0
    for _ in range(trials):
        x = rng.uniform(-0.5 * cap, 1.5 * cap, n)
        worst = max(worst, np.max(np.abs(project_capped_simplex(x, cap) - qp_oracle(x, cap, 1e-3))))
    assert worst <= 2e-3


@settings(max_examples=300, deadline=None)
@given(x=st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=8), cap=st.floats(1e-3, 1e3))
def test_projection_feasible_and_kkt(x, cap):
    x = np.asarray(x)
    p = project_capped_simplex(x, cap)
    assert np.all(p >= 0)
    assert p.sum() <= cap * (1 + 1e-12) + 1e-12
    assert kkt_residual(x, p, cap) < 1e-9 * max(1.0, np.abs(x).max())
