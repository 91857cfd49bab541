"""Euclidean projection onto the capped simplex ``{p >= 0, sum(p) <= cap}``.

All routines accept a single vector of shape ``(n,)`` or a batch of shape
``(..., n)``; the cap may be a scalar or broadcast against ``x.shape[:-1]``.
"""

from __future__ import annotations

import numpy as np

from .core import ParameterError


def _check_finite(x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise ParameterError("projection input has non-finite components")


def project_simplex_face(x, cap):
    """Project onto ``{p >= 0, sum(p) == cap}`` by sort-and-threshold.

    ``cap`` must be strictly positive.
    """
    x = np.asarray(x, dtype=float)
    cap = np.asarray(cap, dtype=float)
    n = x.shape[-1]
    u = -np.sort(-x, axis=-1)
    css = np.cumsum(u, axis=-1) - cap[..., None]
    k = np.arange(1, n + 1, dtype=float)
    cond = u - css / k > 0
    # largest k with cond true; cond[..., 0] holds whenever cap > 0
    rho = n - np.argmax(cond[..., ::-1], axis=-1)
    lam = np.take_along_axis(css, (rho - 1)[..., None], axis=-1) / rho[..., None]
    return np.maximum(x - lam, 0.0)


def project_capped_simplex(x, cap) -> np.ndarray:
    """Nearest point of ``{p >= 0, sum(p) <= cap}`` to ``x``.

    Negative entries are clipped; if the clipped vector already fits under the
    cap it is the answer, otherwise the point is projected onto the face
    ``sum(p) == cap``. A cap of zero maps everything to the origin.

    Raises
    ------
    ParameterError
        If ``x`` has non-finite entries or ``cap`` is negative.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise ParameterError("projection input must have at least one coordinate")
    _check_finite(x)
    cap = np.broadcast_to(np.asarray(cap, dtype=float), x.shape[:-1])
    if np.any(cap < 0) or not np.all(np.isfinite(cap)):
        raise ParameterError("projection cap must be finite and nonnegative")

    y = np.maximum(x, 0.0)
    over = y.sum(axis=-1) > cap
    if not np.any(over):
        return y
    if y.ndim == 1:
        if cap <= 0:
            return np.zeros_like(y)
        return project_simplex_face(y, cap)

    out = y.copy()
    live = over & (cap > 0)
    out[over & ~live] = 0.0
    if np.any(live):
        out[live] = project_simplex_face(y[live], cap[live])
    return out


def project_nonpositive_shift(p_prev, b) -> np.ndarray:
    """Closed-form projection of ``p_prev + b`` when ``b <= 0`` componentwise.

    For ``p_prev`` already feasible, shrinking coordinates can never push the
    total over the cap, so the projection reduces to clipping at zero.
    """
    p_prev = np.asarray(p_prev, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(b > 0):
        raise ParameterError("shift has a positive component; use project_capped_simplex")
    return np.maximum(p_prev + b, 0.0)


def kkt_residual(x, p, cap) -> float:
    """Largest violation of the projection optimality conditions.

    Checks feasibility, ``p_i = max(x_i - lam, 0)`` for the multiplier implied
    by ``p``, ``lam >= 0`` and complementary slackness. Single vector only.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    res = max(0.0, -p.min(), p.sum() - cap)
    pos = p > 0
    if np.any(pos):
        lam = float(np.mean(x[pos] - p[pos]))
    else:
        lam = max(0.0, float(x.max()))
    res = max(res, -lam)
    res = max(res, float(np.max(np.abs(p - np.maximum(x - lam, 0.0)))))
    res = max(res, abs(lam * (p.sum() - cap)))
    return res


def qp_oracle(x, cap: float, resolution: float = 1e-3) -> np.ndarray:
    """Brute-force grid minimizer of ``||p - x||^2`` over the capped simplex.

    Test oracle only (``n <= 3``). Every coordinate but the last is enumerated
    on the grid ``resolution * k``; the last coordinate is the nearest grid
    point of its feasible interval, which is exact for a separable quadratic.
    Choose ``cap`` as a multiple of ``resolution`` so the grid meets every face.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n > 3:
        raise ParameterError("qp_oracle supports n <= 3 only")
    _check_finite(x)
    K = int(round(cap / resolution))
    ks = np.arange(K + 1, dtype=float)
    if n == 1:
        return np.array([np.clip(np.rint(x[0] / resolution), 0, K) * resolution])
    if n == 2:
        last = np.clip(np.rint(x[1] / resolution), 0, K - ks)
        vals = (ks * resolution - x[0]) ** 2 + (last * resolution - x[1]) ** 2
        i = int(np.argmin(vals))
        return np.array([ks[i], last[i]]) * resolution
    rem = K - ks[:, None] - ks[None, :]
    last = np.minimum(min(max(np.rint(x[2] / resolution), 0.0), K), rem)
    d = last * resolution - x[2]
    vals = d * d
    vals += ((ks * resolution - x[0]) ** 2)[:, None]
    vals += ((ks * resolution - x[1]) ** 2)[None, :]
    vals[rem < 0] = np.inf
    i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
    return np.array([ks[i], ks[j], last[i, j]]) * resolution

