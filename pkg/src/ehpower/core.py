"""Shared vocabulary: problem constants, algorithm constants, per-slot records.

Power vectors and channel vectors are plain ``numpy`` float64 arrays. Batched
code uses a leading replication axis, i.e. shape ``(R, n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ATOL = 1e-9


class ParameterError(ValueError):
    """A parameter lies outside its admissible domain."""


class EnergyAvailabilityError(RuntimeError):
    """Requested power exceeds the energy stored in the battery."""


class InvariantViolation(RuntimeError):
    """A guaranteed runtime invariant was broken during a simulation."""


def as_power_vector(p, p_max: float | None = None, atol: float = ATOL) -> np.ndarray:
    """Validate and return ``p`` as a float64 power vector.

    Raises ``ParameterError`` for negative components or, when ``p_max`` is
    given, a total above ``p_max`` (both up to ``atol``).
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ParameterError(f"power vector must be 1-d and nonempty, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ParameterError("power vector has non-finite components")
    if np.any(p < -atol):
        raise ParameterError(f"negative power component in {p}")
    if p_max is not None and p.sum() > p_max + atol:
        raise ParameterError(f"total power {p.sum()} exceeds p_max={p_max}")
    return p


@dataclass(frozen=True)
class SystemState:
    """One slot realization: harvested energy and channel vector."""

    energy: float
    channel: np.ndarray

    def __post_init__(self):
        ch = np.asarray(self.channel, dtype=float)
        if self.energy < 0:
            raise ParameterError(f"negative energy arrival {self.energy}")
        if np.any(ch < 0):
            raise ParameterError("channel components must be nonnegative")
        object.__setattr__(self, "channel", ch)


@dataclass(frozen=True)
class ProblemParams:
    n: int
    p_max: float
    e_max: float
    d_per_coord: tuple[float, ...]
    d_norm: float
    d_max: float
    b_const: float


@dataclass(frozen=True)
class AlgorithmParams:
    v_param: float
    q_lower: float
    recommended_capacity: float
    delay_t0: int = 1


def derive_params(n: int, p_max: float, e_max: float,
                  channel_support_max: Sequence[float]) -> ProblemParams:
    """Problem constants for the log utility.

    The subgradient bound of coordinate ``i`` is the channel support maximum,
    since ``s / (1 + p s)`` peaks at ``p = 0``.
    """
    support = tuple(float(x) for x in channel_support_max)
    if n < 1 or len(support) != n:
        raise ParameterError(f"need n >= 1 and {n} support bounds, got {len(support)}")
    if p_max <= 0 or e_max <= 0 or any(d <= 0 for d in support):
        raise ParameterError("p_max, e_max and channel support bounds must be positive")
    return ProblemParams(
        n=int(n),
        p_max=float(p_max),
        e_max=float(e_max),
        d_per_coord=support,
        d_norm=math.sqrt(sum(d * d for d in support)),
        d_max=max(support),
        b_const=max(e_max, p_max) ** 2,
    )


def derive_algorithm_params(pp: ProblemParams, v: float, t0: int = 1) -> AlgorithmParams:
    """Virtual-queue lower bound ``ceil(V) (D_max + 2 p_max + e_max)`` and the
    battery capacity ``Q_l + p_max`` that guarantees energy availability."""
    if not v > 0:
        raise ParameterError(f"V must be positive, got {v}")
    if int(t0) != t0 or t0 < 1:
        raise ParameterError(f"delay t0 must be a positive integer, got {t0}")
    q_lower = math.ceil(v) * (pp.d_max + 2 * pp.p_max + pp.e_max)
    return AlgorithmParams(
        v_param=float(v),
        q_lower=float(q_lower),
        recommended_capacity=float(q_lower + pp.p_max),
        delay_t0=int(t0),
    )


@dataclass(frozen=True)
class SlotRecord:
    """Trace row for one slot of one replication."""

    run_id: int
    slot: int
    power: np.ndarray
    utility: float
    virtual_queue: float
    battery: float
    state: SystemState
    scaled_down: bool = False
    issued_power: np.ndarray | None = field(default=None, repr=False)
