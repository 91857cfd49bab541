"""Power controllers.

Every controller works on a batch of ``R`` independent replications at once:
powers are ``(R, n)`` arrays, energies and battery levels ``(R,)`` arrays.
The harness drives them through one interface::

    ctrl.reset(R)
    for t in 1..T:
        p = ctrl.power                  # decided before slot t
        ...apply p, observe slot t...
        ctrl.end_of_slot(energy, channel, issued, applied, battery)

``alg1_init`` / ``alg1_observe_and_step`` are the single-replication
functional form of the learning controller's update.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import ATOL, AlgorithmParams, ParameterError, ProblemParams
from .projection import project_capped_simplex, project_nonpositive_shift
from .utility import LogUtility, UtilityFunction, water_filling


def enforce_availability(p, level):
    """Scale ``p`` down to the stored energy when it asks for more.

    Returns ``(p_applied, scaled)``. Totals within ``ATOL`` of the level are
    left untouched; a zero total is never divided by.
    """
    p = np.asarray(p, dtype=float)
    level = np.asarray(level, dtype=float)
    total = p.sum(axis=-1)
    scaled = total > level + ATOL
    if not np.any(scaled):
        return p, scaled
    factor = np.where(scaled, np.maximum(level, 0.0) / np.where(scaled, total, 1.0), 1.0)
    return p * factor[..., None], scaled


# -- learning controller -----------------------------------------------------

@dataclass
class ControllerState:
    """Memory of the learning controller.

    ``prev_power`` is the most recently issued power; ``pending`` holds
    ``(energy, channel, issued, applied)`` for slots whose state has been
    revealed to the harness but not yet consumed by the delayed update.
    """

    prev_power: np.ndarray
    virtual_queue: np.ndarray
    pp: ProblemParams
    ap: AlgorithmParams
    utility: UtilityFunction = field(default_factory=LogUtility)
    pending: deque = field(default_factory=deque)
    slot: int = 0


def alg1_init(pp: ProblemParams, ap: AlgorithmParams, utility: UtilityFunction | None = None,
              batch: int | None = None) -> ControllerState:
    shape = (pp.n,) if batch is None else (batch, pp.n)
    q = 0.0 if batch is None else np.zeros(batch)
    return ControllerState(
        prev_power=np.zeros(shape),
        virtual_queue=np.asarray(q, dtype=float),
        pp=pp,
        ap=ap,
        utility=utility or LogUtility(),
    )


def queue_update(q, energy, used_power):
    """``min(Q + e - sum(p), 0)``."""
    return np.minimum(q + energy - np.sum(used_power, axis=-1), 0.0)


def learning_step(base_power, channel, q, pp: ProblemParams, v: float,
                  utility: UtilityFunction):
    """Projected step ``base + grad/V + Q/V^2`` onto the capped simplex."""
    grad = utility.gradient(base_power, channel)
    shift = grad / v + (np.asarray(q, dtype=float) / v ** 2)[..., None]
    if np.all(shift <= 0):
        return project_nonpositive_shift(base_power, shift)
    return project_capped_simplex(base_power + shift, pp.p_max)


def alg1_observe_and_step(st: ControllerState, energy, channel, observed_power,
                          queue_power=None):
    """Consume one revealed slot: update the queue, then choose the next power.

    ``observed_power`` is the power issued on the revealed slot; it is the base
    point of the gradient step. ``queue_power`` (default: the same vector) is
    what gets charged to the virtual queue.
    """
    used = observed_power if queue_power is None else queue_power
    q = queue_update(st.virtual_queue, np.asarray(energy, dtype=float), used)
    p_next = learning_step(np.asarray(observed_power, dtype=float), channel, q,
                           st.pp, st.ap.v_param, st.utility)
    st.virtual_queue = q
    st.prev_power = p_next
    return st, p_next


class LearningController:
    """Virtual-queue learning controller with an optional observation delay.

    With delay ``t0`` the first ``t0`` powers are zero and, at the end of slot
    ``t >= t0``, slot ``t - t0 + 1`` is consumed. ``q_feed`` picks which power
    is charged to the virtual queue when the harness had to scale a power
    down: ``"issued"`` (the controller's own decision) or ``"applied"``.
    """

    kind = "alg1"

    def __init__(self, pp: ProblemParams, ap: AlgorithmParams,
                 utility: UtilityFunction | None = None, q_feed: str = "issued"):
        if q_feed not in ("issued", "applied"):
            raise ParameterError(f"q_feed must be 'issued' or 'applied', got {q_feed!r}")
        self.pp, self.ap = pp, ap
        self.utility = utility or LogUtility()
        self.q_feed = q_feed
        self.state: ControllerState | None = None

    def reset(self, batch: int) -> None:
        self.state = alg1_init(self.pp, self.ap, self.utility, batch)

    @property
    def power(self) -> np.ndarray:
        return self.state.prev_power

    @property
    def virtual_queue(self) -> np.ndarray:
        return self.state.virtual_queue

    def end_of_slot(self, energy, channel, issued, applied, battery) -> np.ndarray:
        st = self.state
        st.slot += 1
        st.pending.append((energy, channel, issued, applied))
        if len(st.pending) < self.ap.delay_t0:
            st.prev_power = np.zeros_like(st.prev_power)
            return st.prev_power
        e_o, s_o, issued_o, applied_o = st.pending.popleft()
        queue_power = issued_o if self.q_feed == "issued" else applied_o
        alg1_observe_and_step(st, e_o, s_o, issued_o, queue_power)
        return st.prev_power


# -- baselines ---------------------------------------------------------------

class GradientBaseline:
    """Projected online gradient step onto ``{sum(p) <= min(p_max, E)}``."""

    kind = "baseline1"
    virtual_queue = None

    def __init__(self, pp: ProblemParams, gamma: float, utility: UtilityFunction | None = None):
        if not gamma > 0:
            raise ParameterError("gamma must be positive")
        self.pp, self.gamma = pp, float(gamma)
        self.utility = utility or LogUtility()

    def reset(self, batch: int) -> None:
        self._p = np.zeros((batch, self.pp.n))

    @property
    def power(self):
        return self._p

    def end_of_slot(self, energy, channel, issued, applied, battery):
        self._p = baseline1_step(applied, channel, battery, self.pp, self.gamma, self.utility)
        return self._p


class GreedyBaseline:
    """Maximizer of the last observed utility over ``{sum(p) <= min(p_max, E)}``."""

    kind = "baseline2"
    virtual_queue = None

    def __init__(self, pp: ProblemParams):
        self.pp = pp

    def reset(self, batch: int) -> None:
        self._p = np.zeros((batch, self.pp.n))

    @property
    def power(self):
        return self._p

    def end_of_slot(self, energy, channel, issued, applied, battery):
        self._p = baseline2_step(channel, battery, self.pp)
        return self._p


def baseline1_step(p, channel, battery, pp: ProblemParams, gamma: float,
                   utility: UtilityFunction | None = None):
    utility = utility or LogUtility()
    p = np.asarray(p, dtype=float)
    cap = np.minimum(pp.p_max, np.maximum(np.asarray(battery, dtype=float), 0.0))
    return project_capped_simplex(p + gamma * utility.gradient(p, channel), cap)


def baseline2_step(channel, battery, pp: ProblemParams):
    cap = np.minimum(pp.p_max, np.maximum(np.asarray(battery, dtype=float), 0.0))
    return water_filling(channel, cap)
