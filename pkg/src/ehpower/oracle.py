"""Genie benchmarks: the expected-utility upper bound and hindsight best fixed power.

Both maximize an empirical average ``mean_k U(p; s_k)`` over
``{p >= 0, sum(p) <= min(p_max, mean_energy)}`` by projected gradient ascent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ParameterError
from .projection import project_capped_simplex
from .utility import LogUtility, UtilityFunction


class ConvergenceError(RuntimeError):
    def __init__(self, message, last_iterate, mapping_norm):
        super().__init__(f"{message} (gradient-mapping norm {mapping_norm:.3e})")
        self.last_iterate = last_iterate
        self.mapping_norm = mapping_norm


@dataclass
class OracleProblem:
    channels: np.ndarray
    mean_energy: float
    p_max: float
    utility: UtilityFunction = field(default_factory=LogUtility)

    def __post_init__(self):
        self.channels = np.atleast_2d(np.asarray(self.channels, dtype=float))
        if self.channels.shape[0] < 1:
            raise ParameterError("oracle needs at least one channel sample")
        if self.feasible_cap <= 0:
            raise ParameterError("feasible cap min(p_max, mean energy) must be positive")

    @property
    def feasible_cap(self) -> float:
        return min(self.p_max, self.mean_energy)

    @property
    def n(self) -> int:
        return self.channels.shape[1]

    def objective(self, p) -> float:
        return float(np.mean(self.utility.value(p, self.channels)))

    def gradient(self, p) -> np.ndarray:
        return np.mean(self.utility.gradient(p, self.channels), axis=0)

    def curvature(self) -> float:
        # Hessian of the averaged log utility is diagonal with entries
        # mean(s_i^2 / (1 + p_i s_i)^2) <= mean(s_i^2)
        if isinstance(self.utility, LogUtility):
            return max(float(np.max(np.mean(self.channels ** 2, axis=0))), 1e-12)
        return 1.0


def gradient_mapping(prob: OracleProblem, p, step: float) -> np.ndarray:
    return (project_capped_simplex(p + step * prob.gradient(p), prob.feasible_cap) - p) / step


def solve_upper_bound(prob: OracleProblem, iters: int = 20000, tol: float = 1e-9,
                      p0=None):
    """Maximize the sample-average utility under the mean-energy cap.

    Step ``1/L`` with ``L`` the curvature bound; ``L`` doubles whenever the
    quadratic ascent condition fails. Stops when the norm of the gradient
    mapping drops below ``tol``.

    Returns ``(p_star, u_star)``; raises ``ConvergenceError`` otherwise.
    """
    cap = prob.feasible_cap
    p = (np.full(prob.n, cap / prob.n) if p0 is None
         else project_capped_simplex(np.asarray(p0, dtype=float), cap))
    L = prob.curvature()
    f = prob.objective(p)
    norm = np.inf
    for _ in range(iters):
        g = prob.gradient(p)
        while True:
            p_new = project_capped_simplex(p + g / L, cap)
            d = p_new - p
            f_new = prob.objective(p_new)
            if f_new >= f + g @ d - 0.5 * L * (d @ d) - 1e-15:
                break
            L *= 2.0
        norm = L * float(np.linalg.norm(d))
        p, f = p_new, f_new
        if norm < tol:
            return p, f
    raise ConvergenceError(f"no convergence in {iters} iterations", p, norm)


def best_fixed_hindsight(channels, mean_energy: float, p_max: float,
                         utility: UtilityFunction | None = None, tol: float = 1e-9):
    """Best single power vector for a realized channel trace, budget ``mean_energy``."""
    prob = OracleProblem(np.asarray(channels, dtype=float), mean_energy, p_max,
                         utility or LogUtility())
    return solve_upper_bound(prob, tol=tol)[0]
