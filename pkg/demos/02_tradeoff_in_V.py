"""How the step parameter V trades convergence speed for the final gap.

Computes the expected-utility upper bound U* by sample averaging, then runs
the controller for several V and compares the running average with U* at
a few horizons. Larger V ends closer to U* but needs a larger battery and
more slots to get there.
"""

from ehpower import ExperimentConfig, load_bundled, run_experiment
from ehpower.harness.runner import oracle_for_config

base = ExperimentConfig.from_dict(load_bundled("iid.json")).with_overrides(
    {"replications": 50, "horizon": 5000})

p_star, u_star = oracle_for_config(base, samples=200_000)
print(f"U* ~ {u_star:.4f} at p* = {p_star.round(4)}")

print("\n   V   capacity    t=100    t=1000   t=5000   gap at 5000")
for v in (5, 10, 20, 40, 80):
    cfg = base.with_overrides({"controller.V": v})
    res = run_experiment(cfg, u_star=u_star)
    cap = cfg.battery()[0]
    m100, m1k, m5k = (res.at(t)[0] for t in (100, 1000, 5000))
    print(f"{v:4d}  {cap:9.0f}   {m100:.4f}   {m1k:.4f}   {m5k:.4f}   {u_star - m5k:.4f}")
