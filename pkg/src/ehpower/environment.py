"""State generators (energy arrivals, channels) and the physical battery.

Every replication draws from two independent streams derived from
``(master_seed, run_id, stream_id)``, so the energy sequence of a run never
depends on which channel model it is paired with, and runs can be generated
in any order.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ATOL, EnergyAvailabilityError, ParameterError, SystemState

ENERGY_STREAM = 0
CHANNEL_STREAM = 1


def stream(master_seed: int, run_id: int, stream_id: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(run_id), int(stream_id)))
    return np.random.Generator(np.random.PCG64(seq))


# -- energy ------------------------------------------------------------------

class EnergyProcess:
    """Independent per-slot energy arrivals with a known mean."""

    e_max: float
    mean: float

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformEnergy(EnergyProcess):
    low: float = 0.0
    high: float = 3.0

    def __post_init__(self):
        if not 0 <= self.low <= self.high:
            raise ParameterError(f"need 0 <= low <= high, got [{self.low}, {self.high}]")

    @property
    def e_max(self):
        return self.high

    @property
    def mean(self):
        return 0.5 * (self.low + self.high)

    def sample(self, rng, size):
        return rng.uniform(self.low, self.high, size)


@dataclass(frozen=True)
class ConstantEnergy(EnergyProcess):
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ParameterError("constant energy must be nonnegative")

    @property
    def e_max(self):
        return self.value

    @property
    def mean(self):
        return self.value

    def sample(self, rng, size):
        rng.random(size)  # keep stream consumption identical across kinds
        return np.full(size, float(self.value))


@dataclass(frozen=True)
class TableEnergy(EnergyProcess):
    values: tuple
    probs: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        q = np.asarray(self.probs, dtype=float)
        if v.shape != q.shape or v.size == 0 or np.any(v < 0) or np.any(q < 0):
            raise ParameterError("table energy needs matching nonnegative values and probs")
        if abs(q.sum() - 1.0) > 1e-12:
            raise ParameterError("table energy probabilities must sum to 1")

    @property
    def e_max(self):
        return float(max(self.values))

    @property
    def mean(self):
        return float(np.dot(self.values, self.probs))

    def sample(self, rng, size):
        idx = np.searchsorted(np.cumsum(self.probs), rng.random(size), side="right")
        idx = np.minimum(idx, len(self.values) - 1)
        return np.asarray(self.values, dtype=float)[idx]


# -- channel -----------------------------------------------------------------

class ChannelProcess:
    """Channel vectors for consecutive slots.

    ``path(rng, size, state)`` returns ``(values, state)`` where ``state`` is
    whatever the process needs to continue the sequence in a later call.
    """

    n: int

    def support_max(self) -> np.ndarray:
        raise NotImplementedError

    def path(self, rng, size, state=None):
        raise NotImplementedError


@dataclass(frozen=True)
class TruncatedRayleighChannel(ChannelProcess):
    """Independent Rayleigh subbands restricted to ``[low, high]``.

    ``mode="condition"`` samples the conditional law on the window by inverse
    CDF; ``mode="clip"`` draws an ordinary Rayleigh variate and clips it.
    """

    sigma: tuple = (0.5, 1.0)
    low: float = 0.0
    high: float = 4.0
    mode: str = "condition"

    def __post_init__(self):
        if any(s <= 0 for s in self.sigma):
            raise ParameterError("Rayleigh scale must be positive")
        if not 0 <= self.low < self.high:
            raise ParameterError("need 0 <= low < high")
        if self.mode not in ("condition", "clip"):
            raise ParameterError(f"unknown truncation mode {self.mode!r}")

    @property
    def n(self):
        return len(self.sigma)

    def support_max(self):
        return np.full(self.n, float(self.high))

    def cdf(self, x, i: int):
        """Distribution function of subband ``i`` (conditioning mode)."""
        sig2 = 2.0 * self.sigma[i] ** 2
        x = np.clip(np.asarray(x, dtype=float), self.low, self.high)
        s_lo = np.exp(-self.low ** 2 / sig2)
        s_hi = np.exp(-self.high ** 2 / sig2)
        return (s_lo - np.exp(-x ** 2 / sig2)) / (s_lo - s_hi)

    def path(self, rng, size, state=None):
        sig2 = 2.0 * np.asarray(self.sigma, dtype=float) ** 2
        u = rng.random((size, self.n))
        if self.mode == "condition":
            # survival function S(x) = exp(-x^2 / 2 sigma^2), sampled uniformly on [S(high), S(low)]
            s_lo = np.exp(-self.low ** 2 / sig2)
            s_hi = np.exp(-self.high ** 2 / sig2)
            v = s_hi + u * (s_lo - s_hi)
            x = np.sqrt(-sig2 * np.log(v))
        else:
            x = np.sqrt(-sig2 * np.log1p(-u))
        return np.clip(x, self.low, self.high), None


@dataclass(frozen=True)
class MarkovChannel(ChannelProcess):
    """Finite-state Markov chain over a list of channel vectors.

    The first slot's state is drawn from the stationary law unless
    ``initial_state`` pins it.
    """

    states: tuple
    transition: tuple
    initial_state: int | None = None

    def __post_init__(self):
        vals = np.asarray(self.states, dtype=float)
        P = np.asarray(self.transition, dtype=float)
        k = vals.shape[0]
        if vals.ndim != 2 or P.shape != (k, k):
            raise ParameterError("need k channel vectors and a k x k transition matrix")
        if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
            raise ParameterError("transition rows must be nonnegative and sum to 1")
        if np.any(vals < 0):
            raise ParameterError("channel states must be nonnegative")
        if self.initial_state is not None and not 0 <= self.initial_state < k:
            raise ParameterError("initial_state out of range")

    @property
    def n(self):
        return len(self.states[0])

    def support_max(self):
        return np.asarray(self.states, dtype=float).max(axis=0)

    def stationary(self) -> np.ndarray:
        P = np.asarray(self.transition, dtype=float)
        k = P.shape[0]
        A = np.vstack([P.T - np.eye(k), np.ones(k)])
        rhs = np.zeros(k + 1)
        rhs[-1] = 1.0
        pi = np.linalg.lstsq(A, rhs, rcond=None)[0]
        return pi

    def state_path(self, rng, size, state=None):
        """Indices of the visited states; ``state`` is the previous slot's index."""
        u = rng.random(size).tolist()
        cum = [list(np.cumsum(row)) for row in self.transition]
        last = len(self.states) - 1
        out = [0] * size
        cur = state
        for t in range(size):
            if cur is None:
                if self.initial_state is not None:
                    cur = self.initial_state
                else:
                    cur = min(bisect.bisect_right(list(np.cumsum(self.stationary())), u[t]), last)
            else:
                cur = min(bisect.bisect_right(cum[cur], u[t]), last)
            out[t] = cur
        return np.asarray(out, dtype=np.intp), cur

    def path(self, rng, size, state=None):
        idx, cur = self.state_path(rng, size, state)
        return np.asarray(self.states, dtype=float)[idx], cur


# -- combined environment ----------------------------------------------------

@dataclass(frozen=True)
class Environment:
    energy: EnergyProcess
    channel: ChannelProcess

    @property
    def n(self):
        return self.channel.n

    def sample_run(self, master_seed: int, run_id: int, horizon: int):
        """Energy ``(T,)`` and channel ``(T, n)`` arrays for one replication."""
        e = self.energy.sample(stream(master_seed, run_id, ENERGY_STREAM), horizon)
        s, _ = self.channel.path(stream(master_seed, run_id, CHANNEL_STREAM), horizon)
        return e, s

    def sample_batch(self, master_seed: int, run_ids: Sequence[int], horizon: int):
        """Stacked ``(R, T)`` energies and ``(R, T, n)`` channels."""
        es, ss = zip(*(self.sample_run(master_seed, r, horizon) for r in run_ids))
        return np.stack(es), np.stack(ss)

    def states(self, master_seed: int, run_id: int):
        return StateStream(self, master_seed, run_id)


class StateStream:
    """Slot-by-slot iterator over one replication's states.

    Produces the same sequence as ``Environment.sample_run``; draws are made
    in blocks and the channel process state is carried across blocks.
    """

    def __init__(self, env: Environment, master_seed: int, run_id: int, block: int = 1024):
        self.env = env
        self._erng = stream(master_seed, run_id, ENERGY_STREAM)
        self._crng = stream(master_seed, run_id, CHANNEL_STREAM)
        self._block = block
        self._cstate = None
        self._e = np.empty(0)
        self._s = np.empty((0, env.n))
        self._offset = 0  # slots generated before the current block
        self.slot = 0

    def sample_state(self, slot: int) -> SystemState:
        """State of ``slot`` (1-based); slots must be requested in order."""
        if slot != self.slot + 1:
            raise ParameterError(f"slots must be consumed in order; expected {self.slot + 1}, got {slot}")
        i = slot - 1 - self._offset
        if i >= self._e.size:
            self._offset += self._e.size
            self._e = self.env.energy.sample(self._erng, self._block)
            self._s, self._cstate = self.env.channel.path(self._crng, self._block, self._cstate)
            i = 0
        self.slot = slot
        return SystemState(float(self._e[i]), self._s[i].copy())

    def __iter__(self):
        while True:
            yield self.sample_state(self.slot + 1)


def sample_state(stream_: StateStream, slot: int) -> SystemState:
    return stream_.sample_state(slot)


# -- battery -----------------------------------------------------------------

@dataclass(frozen=True)
class BatteryState:
    level: float
    capacity: float

    def __post_init__(self):
        if not -ATOL <= self.level <= self.capacity + ATOL:
            raise ParameterError(f"battery level {self.level} outside [0, {self.capacity}]")


def battery_step(b: BatteryState, applied_power, arrival: float) -> BatteryState:
    """Drain the applied power, add the arrival, clamp at capacity."""
    used = float(np.sum(applied_power))
    if used > b.level + ATOL:
        raise EnergyAvailabilityError(f"power {used} exceeds stored energy {b.level}")
    if arrival < 0:
        raise ParameterError("energy arrival must be nonnegative")
    return BatteryState(max(min(b.level - used + arrival, b.capacity), 0.0), b.capacity)
