"""Small batteries, observation delay and two simple baselines.

With a 10-unit battery that starts empty the controller's decisions are
sometimes scaled down to what is stored. The script compares it with a
plain projected-gradient rule and a greedy rule that maximizes the last
observed utility, first on i.i.d. fading and then on a two-state Markov
channel, where the reference is the best fixed power in hindsight.
Figures are written to ./demo_out.
"""

from pathlib import Path

from ehpower.harness.figures import run_figure_suite

out = Path("demo_out")
small = {"replications": 50}

for fid, what in ((3, "observation delay, E_max=20"), (4, "baselines, i.i.d."),
                  (8, "baselines, Markov")):
    fig = run_figure_suite(fid, out, small, oracle_samples=200_000)
    ref_name, ref = fig.reference
    print(f"\n{what}  ({ref_name} = {ref:.4f})")
    for label, res in zip(fig.labels, fig.results):
        m, se = res.at(5000)
        print(f"  {label:12s} final {m:.4f} +/- {se:.4f}  scaled-down slots {res.summary['total_scaled']}")
    print(f"  -> {fig.svg_path}")
