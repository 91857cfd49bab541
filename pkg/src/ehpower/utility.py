"""Concave per-slot utilities of a power vector given the slot's channel."""

from __future__ import annotations

import numpy as np


class UtilityFunction:
    """Interface shared by every utility the controllers can optimize.

    Subclasses implement ``value`` and ``gradient``; both take power and
    channel arrays with a common leading batch shape and reduce over the
    last axis. ``bounds(support_max)`` returns per-coordinate subgradient
    bounds over the feasible set for channels bounded by ``support_max``.
    """

    def value(self, p, s):
        raise NotImplementedError

    def gradient(self, p, s):
        raise NotImplementedError

    def bounds(self, support_max):
        raise NotImplementedError

    def __call__(self, p, s):
        return self.value(p, s)


class LogUtility(UtilityFunction):
    """Sum-rate utility ``sum_i ln(1 + p_i s_i)`` (natural log)."""

    def value(self, p, s):
        p = np.asarray(p, dtype=float)
        s = np.asarray(s, dtype=float)
        return np.sum(np.log1p(p * s), axis=-1)

    def gradient(self, p, s):
        p = np.asarray(p, dtype=float)
        s = np.asarray(s, dtype=float)
        return s / (1.0 + p * s)

    def bounds(self, support_max):
        # s / (1 + p s) is largest at p = 0
        return np.asarray(support_max, dtype=float)

    def curvature(self, s):
        """Upper bound on the Hessian magnitude, ``max s_i^2``, over p >= 0."""
        return float(np.max(np.asarray(s, dtype=float) ** 2))


def log_utility_value(p, s) -> float:
    return LogUtility().value(p, s)


def log_utility_gradient(p, s) -> np.ndarray:
    return LogUtility().gradient(p, s)


def water_filling(s, cap, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Maximize ``sum_i ln(1 + p_i s_i)`` subject to ``p >= 0, sum(p) <= cap``.

    Water-filling form ``p_i = max(mu - 1/s_i, 0)`` with the water level ``mu``
    found by bisection so that the total equals ``cap``. Subbands with
    ``s_i == 0`` get nothing; an all-zero channel returns the zero vector.
    Works on a single vector or a batch ``(R, n)`` with caps of shape ``(R,)``.
    """
    s = np.asarray(s, dtype=float)
    single = s.ndim == 1
    s2 = np.atleast_2d(s)
    cap = np.broadcast_to(np.asarray(cap, dtype=float), s2.shape[:-1]).copy()
    live = s2 > 0
    inv = np.where(live, 1.0 / np.where(live, s2, 1.0), np.inf)

    lo = np.zeros_like(cap)
    finite_inv = np.where(live, inv, 0.0)
    hi = cap + finite_inv.max(axis=-1)  # total(hi) >= cap whenever any s_i > 0

    def total(mu):
        return np.sum(np.maximum(mu[:, None] - inv, 0.0), axis=-1)

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        too_much = total(mid) > cap
        hi = np.where(too_much, mid, hi)
        lo = np.where(too_much, lo, mid)
        if np.all(hi - lo <= tol):
            break
    p = np.maximum(lo[:, None] - inv, 0.0)
    p[~live.any(axis=-1) | (cap <= 0)] = 0.0
    return p[0] if single else p
