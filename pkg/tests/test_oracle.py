import math

import numpy as np
import pytest

from ehpower.environment import stream
from ehpower.harness.config import ExperimentConfig, load_bundled
from ehpower.harness.runner import oracle_for_config
from ehpower.oracle import (ConvergenceError, OracleProblem, best_fixed_hindsight, gradient_mapping,
                            solve_upper_bound)
from ehpower.utility import water_filling


def grid_argmax(states, weights, cap, res=1e-3):
    """Independent 2-d grid search of the weighted log utility over the capped simplex."""
    K = int(round(cap / res))
    k1, k2 = np.meshgrid(np.arange(K + 1), np.arange(K + 1), indexing="ij", sparse=True)
    vals = np.zeros((K + 1, K + 1))
    for s, w in zip(states, weights):
        vals += w * (np.log1p(k1 * res * s[0]) + np.log1p(k2 * res * s[1]))
    vals[k1 + k2 > K] = -np.inf
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    return np.array([i, j]) * res, vals[i, j]


def iid_cfg():
    return ExperimentConfig.from_dict(load_bundled("iid.json"))


def test_degenerate_single_sample():
    p, u = solve_upper_bound(OracleProblem([[1.0, 1.0]], 2.0, 5.0))
    np.testing.assert_allclose(p, [1.0, 1.0], atol=1e-8)
    assert u == pytest.approx(2 * math.log(2), abs=1e-12)
    gp, gu = grid_argmax([[1.0, 1.0]], [1.0], 2.0)
    np.testing.assert_allclose(gp, [1.0, 1.0], atol=1e-3)
    assert gu == pytest.approx(1.3863, abs=1e-4)


def test_cap_collapses_to_p_max():
    prob = OracleProblem([[1.0, 2.0]], 9.0, 5.0)
    assert prob.feasible_cap == 5.0
    p, _ = solve_upper_bound(prob)
    assert p.sum() == pytest.approx(5.0, abs=1e-9)


def _channels(n):
    env = iid_cfg().environment()
    return env.channel.path(stream(1, 0, 2), n)[0]


def test_monotone_in_mean_energy():
    s = _channels(10_000)
    vals = [solve_upper_bound(OracleProblem(s, e, 5.0))[1] for e in (0.5, 1.0, 1.5, 2.0)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_certificate_and_feasibility():
    prob = OracleProblem(_channels(10_000), 1.5, 5.0)
    p, _ = solve_upper_bound(prob, tol=1e-9)
    assert np.all(p >= 0) and p.sum() <= 1.5 + 1e-12
    step = 1.0 / prob.curvature()
    assert np.linalg.norm(gradient_mapping(prob, p, step)) < 1e-9


def test_non_convergence_reports_iterate():
    prob = OracleProblem(_channels(1000), 1.5, 5.0)
    with pytest.raises(ConvergenceError) as info:
        solve_upper_bound(prob, iters=1, tol=1e-14)
    assert info.value.last_iterate.shape == (2,)
    assert info.value.mapping_norm > 1e-14


def test_saa_stability():
    a = oracle_for_config(iid_cfg(), 1_000_000)[1]
    b = oracle_for_config(iid_cfg().with_overrides({"master_seed": 99}), 1_000_000)[1]
    assert abs(a - b) < 5e-3


class TestHindsight:
    def test_constant_trace(self):
        np.testing.assert_allclose(best_fixed_hindsight(np.ones((50, 2)), 2.0, 5.0), [1, 1], atol=1e-8)

    def test_single_slot_is_water_filling(self):
        s = np.array([[0.45, 1.2]])
        np.testing.assert_allclose(best_fixed_hindsight(s, 1.5, 5.0), water_filling(s[0], 1.5),
                                   atol=1e-8)

    def test_markov_trace_against_grid(self):
        cfg = ExperimentConfig.from_dict(load_bundled("markov.json"))
        s, _ = cfg.environment().channel.path(stream(cfg.master_seed, 0, 1), 100_000)
        q = best_fixed_hindsight(s, 1.5, 5.0)
        states, counts = np.unique(s, axis=0, return_counts=True)
        gq, _ = grid_argmax(states, counts / counts.sum(), 1.5)
        assert np.max(np.abs(q - gq)) <= 2e-3
