"""Replicated simulation of (environment x controller x battery).

Replications run as one numpy batch; each run reads its own seeded state
streams, so a run's trajectory does not depend on which other runs share its
batch. Per-run running averages are kept at the sampling stride and reduced
across runs in ``run_id`` order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ..controller import enforce_availability
from ..core import ATOL, InvariantViolation, SlotRecord, SystemState
from ..oracle import best_fixed_hindsight
from ..utility import LogUtility
from .config import ExperimentConfig

CSV_HEADER = ("slot", "mean_avg_utility", "stderr", "mean_Q", "mean_E",
              "violations", "scaled_count")
IDENTITY_TOL = 1e-9
_MAX_BATCH_CELLS = 20_000_000


@dataclass(frozen=True)
class AggregateRow:
    slot: int
    mean_avg_utility: float
    stderr: float
    mean_Q: float
    mean_E: float
    violations: int
    scaled_count: int


@dataclass
class RunBatch:
    """Per-run traces at the recorded slots, rows ordered by ``run_ids``."""

    run_ids: np.ndarray
    slots: np.ndarray
    avg_utility: np.ndarray
    queue: np.ndarray
    battery: np.ndarray
    violations: np.ndarray  # cumulative per run
    scaled: np.ndarray      # cumulative per run
    min_queue: np.ndarray
    diagnostics: list = field(default_factory=list)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    slots: np.ndarray
    mean_avg_utility: np.ndarray
    stderr: np.ndarray
    mean_queue: np.ndarray
    mean_battery: np.ndarray
    violations: np.ndarray
    scaled_count: np.ndarray
    per_run_final: np.ndarray
    summary: dict

    def rows(self) -> list[AggregateRow]:
        return [AggregateRow(int(s), float(u), float(se), float(q), float(e), int(v), int(c))
                for s, u, se, q, e, v, c in zip(self.slots, self.mean_avg_utility, self.stderr,
                                                 self.mean_queue, self.mean_battery,
                                                 self.violations, self.scaled_count)]

    def at(self, slot: int) -> tuple[float, float]:
        """``(mean running average, stderr)`` at a recorded slot."""
        i = int(np.searchsorted(self.slots, slot))
        if i >= self.slots.size or self.slots[i] != slot:
            raise KeyError(f"slot {slot} was not recorded")
        return float(self.mean_avg_utility[i]), float(self.stderr[i])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows():
            w.writerow([r.slot, repr(r.mean_avg_utility), repr(r.stderr), repr(r.mean_Q),
                        repr(r.mean_E), r.violations, r.scaled_count])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def theorem1_envelope(u_star: float, pp, v: float, t) -> np.ndarray:
    """Lower bound ``U* - V p^2/(2t) - B/(2Vt) - (D^2 + B)/(2V)``."""
    t = np.asarray(t, dtype=float)
    return (u_star - v * pp.p_max ** 2 / (2 * t) - pp.b_const / (2 * v * t)
            - (pp.d_norm ** 2 + pp.b_const) / (2 * v))


def recorded_slots(horizon: int, stride: int) -> np.ndarray:
    slots = np.arange(stride, horizon + 1, stride)
    if slots.size == 0 or slots[-1] != horizon:
        slots = np.append(slots, horizon)
    if stride > 1:
        slots = np.insert(slots, 0, 1)
    return slots


def simulate_batch(cfg: ExperimentConfig, run_ids, strict: bool = True,
                   on_slot=None) -> RunBatch:
    """Simulate the given replications of ``cfg`` together.

    ``strict`` turns any invariant violation into ``InvariantViolation``;
    otherwise violations are counted. ``on_slot(t, info)`` receives the raw
    per-slot arrays (used for traces).
    """
    run_ids = np.asarray(list(run_ids), dtype=int)
    R, T = run_ids.size, cfg.horizon
    env = cfg.environment()
    pp = cfg.problem_params()
    utility = LogUtility()
    ctrl = cfg.controller()
    capacity, level0 = cfg.battery()
    theorem3 = cfg.battery_mode == "theorem3"
    is_alg1 = cfg.controller_kind == "alg1"
    check_qbound = is_alg1 and cfg.delay == 1 and cfg.scale_down_mode == "issued"
    q_lower = cfg.algorithm_params().q_lower if is_alg1 else math.inf
    check_identity = theorem3 and cfg.delay == 1

    energy, channel = env.sample_batch(cfg.master_seed, run_ids, T)
    slots = recorded_slots(T, cfg.stride)
    rec = np.zeros(T + 1, dtype=bool)
    rec[slots] = True
    K = slots.size
    avg_u = np.empty((R, K))
    q_rec = np.full((R, K), np.nan)
    e_rec = np.empty((R, K))
    viol_rec = np.empty((R, K), dtype=np.int64)
    scaled_rec = np.empty((R, K), dtype=np.int64)

    ctrl.reset(R)
    level = np.full(R, level0)
    cum_u = np.zeros(R)
    n_viol = np.zeros(R, dtype=np.int64)
    n_scaled = np.zeros(R, dtype=np.int64)
    min_q = np.zeros(R)
    diagnostics = []
    k = 0

    def violation(t, mask, what):
        if not np.any(mask):
            return
        n_viol[mask] += 1
        rid = run_ids[np.argmax(mask)]
        msg = f"slot {t}, run {rid}: {what}"
        diagnostics.append(msg)
        if strict:
            raise InvariantViolation(f"{cfg.name}: {msg}")

    for t in range(1, T + 1):
        e_t = energy[:, t - 1]
        s_t = channel[:, t - 1]
        issued = ctrl.power
        applied, scaled = enforce_availability(issued, level)
        if theorem3:
            violation(t, scaled, "energy availability fault under theorem3 sizing")
        n_scaled += scaled
        u_t = utility.value(applied, s_t)
        cum_u += u_t
        level = np.minimum(level - applied.sum(axis=1) + e_t, capacity)
        violation(t, level < -ATOL, "battery level below zero")
        level = np.maximum(level, 0.0)
        ctrl.end_of_slot(e_t, s_t, issued, applied, level)

        q = ctrl.virtual_queue
        if q is not None:
            min_q = np.minimum(min_q, q)
            violation(t, q > 0, "virtual queue positive")
            if check_qbound:
                violation(t, q < -q_lower - ATOL, f"virtual queue below -Q_l = {-q_lower}")
            if check_identity:
                violation(t, np.abs(level - (q + capacity)) > IDENTITY_TOL,
                          "battery identity E = Q + E_max broken")
        if on_slot is not None:
            on_slot(t, dict(energy=e_t, channel=s_t, issued=issued, applied=applied,
                            scaled=scaled, utility=u_t, battery=level, queue=q))
        if rec[t]:
            avg_u[:, k] = cum_u / t
            if q is not None:
                q_rec[:, k] = q
            e_rec[:, k] = level
            viol_rec[:, k] = n_viol
            scaled_rec[:, k] = n_scaled
            k += 1

    return RunBatch(run_ids, slots, avg_u, q_rec, e_rec, viol_rec, scaled_rec,
                    min_q if is_alg1 else np.full(R, np.nan), diagnostics)


def aggregate(cfg: ExperimentConfig, batches: list[RunBatch], u_star: float | None = None
              ) -> ExperimentResult:
    """Reduce run batches (in any order) into per-slot cross-run statistics."""
    run_ids = np.concatenate([b.run_ids for b in batches])
    order = np.argsort(run_ids, kind="stable")
    if np.any(np.diff(run_ids[order]) == 0):
        raise ValueError("duplicate run ids in batches")

    def cat(attr):
        return np.concatenate([getattr(b, attr) for b in batches])[order]

    avg_u, q, e = cat("avg_utility"), cat("queue"), cat("battery")
    viol, scaled, min_q = cat("violations"), cat("scaled"), cat("min_queue")
    R = avg_u.shape[0]
    slots = batches[0].slots
    mean_u = avg_u.mean(axis=0)
    se = avg_u.std(axis=0, ddof=1) / math.sqrt(R) if R > 1 else np.zeros_like(mean_u)
    mean_q = q.mean(axis=0)

    pp = cfg.problem_params()
    summary = {
        "name": cfg.name,
        "controller": cfg.controller_kind,
        "replications": R,
        "horizon": cfg.horizon,
        "final_avg_utility": float(mean_u[-1]),
        "final_stderr": float(se[-1]),
        "min_Q": float(np.nanmin(min_q)) if np.any(np.isfinite(min_q)) else None,
        "max_scaled_count": int(scaled[:, -1].max()),
        "total_scaled": int(scaled[:, -1].sum()),
        "violations": int(viol[:, -1].sum()),
        "battery_capacity": cfg.battery()[0],
        "diagnostics": [d for b in batches for d in b.diagnostics][:20],
    }
    if cfg.controller_kind == "alg1":
        ap = cfg.algorithm_params()
        summary["q_lower"] = ap.q_lower
        summary["recommended_capacity"] = ap.recommended_capacity
    if u_star is not None:
        summary["u_star"] = float(u_star)
        if cfg.controller_kind == "alg1":
            summary["theorem1_envelope"] = float(
                theorem1_envelope(u_star, pp, cfg.v_param, cfg.horizon))
    return ExperimentResult(cfg, slots, mean_u, se, mean_q, e.mean(axis=0),
                            viol.sum(axis=0), scaled.sum(axis=0), avg_u[:, -1], summary)


def run_batches(cfg: ExperimentConfig, strict: bool = True, batch_size: int | None = None):
    R = cfg.replications
    if batch_size is None:
        per_run = cfg.horizon * (cfg.environment().n + 1)
        batch_size = max(1, min(R, _MAX_BATCH_CELLS // per_run))
    return [simulate_batch(cfg, range(lo, min(lo + batch_size, R)), strict)
            for lo in range(0, R, batch_size)]


def run_experiment(cfg: ExperimentConfig, u_star: float | None = None, strict: bool = True,
                   batch_size: int | None = None) -> ExperimentResult:
    """Run all replications of ``cfg`` and aggregate them.

    Deterministic in ``cfg.master_seed``. With ``strict`` (default) any
    invariant violation aborts with ``InvariantViolation``.
    """
    return aggregate(cfg, run_batches(cfg, strict, batch_size), u_star)


def trace_run(cfg: ExperimentConfig, run_id: int = 0, strict: bool = True) -> list[SlotRecord]:
    """Slot-by-slot records of a single replication."""
    rows = []

    def keep(t, info):
        q = info["queue"]
        rows.append(SlotRecord(
            run_id=run_id, slot=t,
            power=info["applied"][0].copy(),
            utility=float(info["utility"][0]),
            virtual_queue=float(q[0]) if q is not None else math.nan,
            battery=float(info["battery"][0]),
            state=SystemState(float(info["energy"][0]), info["channel"][0].copy()),
            scaled_down=bool(info["scaled"][0]),
            issued_power=info["issued"][0].copy(),
        ))

    simulate_batch(cfg, [run_id], strict, on_slot=keep)
    return rows


def hindsight_reference(cfg: ExperimentConfig, tol: float = 1e-9):
    """Per-run best fixed power in hindsight and its average utility.

    Each run's channel trace is replayed; the budget is the energy process's
    mean. Returns ``(mean, stderr, per_run_values)``.
    """
    env = cfg.environment()
    pp = cfg.problem_params()
    utility = LogUtility()
    vals = []
    for r in range(cfg.replications):
        _, s = env.sample_run(cfg.master_seed, r, cfg.horizon)
        q = best_fixed_hindsight(s, env.energy.mean, pp.p_max, utility, tol)
        vals.append(float(np.mean(utility.value(q, s))))
    vals = np.asarray(vals)
    se = vals.std(ddof=1) / math.sqrt(vals.size) if vals.size > 1 else 0.0
    return float(vals.mean()), float(se), vals


ORACLE_STREAM = 2


def oracle_for_config(cfg: ExperimentConfig, samples: int = 1_000_000, tol: float = 1e-9):
    """Upper bound ``(p_star, u_star)`` for the config's environment.

    Channels come from a dedicated stream of the master seed; for a Markov
    channel this is one long path, so the average is over its stationary law.
    The energy budget is the process's analytic mean.
    """
    from ..environment import stream
    from ..oracle import OracleProblem, solve_upper_bound

    env = cfg.environment()
    pp = cfg.problem_params()
    s, _ = env.channel.path(stream(cfg.master_seed, 0, ORACLE_STREAM), int(samples))
    return solve_upper_bound(OracleProblem(s, env.energy.mean, pp.p_max), tol=tol)
