"""Follow one replication of the learning controller slot by slot.

Starts from the bundled i.i.d. setup (two subbands, uniform harvest on
[0, 3], battery sized to Q^l + p_max) and prints how the virtual queue,
the battery and the issued power move during the first slots, then checks
that the battery level tracks the queue exactly.
"""

import numpy as np

from ehpower import ExperimentConfig, load_bundled
from ehpower.harness.runner import trace_run

cfg = ExperimentConfig.from_dict(load_bundled("iid.json")).with_overrides({"horizon": 2000})
ap = cfg.algorithm_params()
capacity, _ = cfg.battery()
print(f"V={ap.v_param:g}  Q_l={ap.q_lower:g}  battery capacity={capacity:g}")

records = trace_run(cfg, run_id=0)

print("\n slot   e[t]   s[t]            p[t]            Q[t]      E[t]")
for r in records[:12]:
    print(f"{r.slot:5d}  {r.state.energy:5.2f}  {np.round(r.state.channel, 2)!s:14}  "
          f"{np.round(r.power, 3)!s:14}  {r.virtual_queue:8.3f}  {r.battery:8.3f}")

# the queue is the battery's deficit below full
gap = max(abs(r.battery - (r.virtual_queue + capacity)) for r in records)
print(f"\nmax |E - (Q + E_max)| over {len(records)} slots: {gap:.2e}")

u = np.array([r.utility for r in records])
avg = np.cumsum(u) / np.arange(1, u.size + 1)
for t in (10, 100, 500, 1000, 2000):
    print(f"running average utility at t={t:5d}: {avg[t - 1]:.4f}")

spent = np.array([r.power.sum() for r in records])
print(f"mean harvest {np.mean([r.state.energy for r in records]):.3f}, "
      f"mean spend {spent.mean():.3f}, min Q {min(r.virtual_queue for r in records):.2f}")
