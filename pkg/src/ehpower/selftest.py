"""Built-in invariant checks runnable without the test suite (``ehpower selftest``)."""

from __future__ import annotations

import numpy as np

from .core import derive_algorithm_params, derive_params
from .harness.config import ExperimentConfig, load_bundled
from .harness.runner import run_experiment
from .projection import kkt_residual, project_capped_simplex, project_nonpositive_shift, qp_oracle


def _projection_checks(trials, rng):
    worst_kkt = worst_idem = 0.0
    expansive = mismatch = 0
    for _ in range(trials):
        n = int(rng.choice([1, 2, 5, 10]))
        cap = float(rng.uniform(0.1, 10))
        x = rng.normal(0, 5, n)
        y = rng.normal(0, 5, n)
        px, py = project_capped_simplex(x, cap), project_capped_simplex(y, cap)
        worst_kkt = max(worst_kkt, kkt_residual(x, px, cap))
        worst_idem = max(worst_idem, float(np.max(np.abs(project_capped_simplex(px, cap) - px))))
        expansive += np.linalg.norm(px - py) > np.linalg.norm(x - y) + 1e-12
        p = rng.dirichlet(np.ones(n)) * cap * rng.uniform(0, 1)
        b = -rng.exponential(1.0, n)
        mismatch += not np.array_equal(project_nonpositive_shift(p, b),
                                       project_capped_simplex(p + b, cap))
    return worst_kkt, worst_idem, int(expansive), int(mismatch)


def run_selftest(quick: bool = True, seed: int = 0):
    """Yield ``(name, passed, detail)`` for each check."""
    rng = np.random.default_rng(seed)
    pp = derive_params(2, 5.0, 3.0, [4.0, 4.0])
    ap = derive_algorithm_params(pp, 40)
    yield ("battery sizing constant", ap.recommended_capacity == 685.0,
           f"Q_l={ap.q_lower:g}, capacity={ap.recommended_capacity:g}")

    kkt, idem, exp_, mis = _projection_checks(1000 if quick else 10_000, rng)
    yield ("projection KKT residual", kkt < 1e-9, f"max={kkt:.2e}")
    yield ("projection idempotence", idem <= 1e-12, f"max={idem:.2e}")
    yield ("projection non-expansive", exp_ == 0, f"failures={exp_}")
    yield ("closed-form shift agrees", mis == 0, f"mismatches={mis}")

    worst = 0.0
    for _ in range(20 if quick else 200):
        x = rng.uniform(-3, 8, 2)
        worst = max(worst, float(np.max(np.abs(project_capped_simplex(x, 5.0) - qp_oracle(x, 5.0)))))
    yield ("grid oracle agreement (n=2)", worst <= 2e-3, f"max={worst:.2e}")

    base = ExperimentConfig.from_dict(load_bundled("iid.json"))
    for V in (5, 40):
        cfg = base.with_overrides({"controller.V": V, "replications": 20 if quick else 200,
                                   "horizon": 1000 if quick else 5000})
        res = run_experiment(cfg, strict=False)
        s = res.summary
        ok = s["violations"] == 0 and s["total_scaled"] == 0 and s["min_Q"] >= -s["q_lower"]
        yield (f"theorem3 invariants V={V}", ok,
               f"violations={s['violations']} min_Q={s['min_Q']:.2f} Q_l={s['q_lower']:g}")

    cfg = base.with_overrides({"replications": 4, "horizon": 300})
    same = run_experiment(cfg).to_csv() == run_experiment(cfg).to_csv()
    yield ("deterministic CSV", same, "")
