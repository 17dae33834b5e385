"""A short office-delivery training run with artifact emission: metrics
CSVs, tree and Q-table dumps, the refinement log, and the SVG charts
(learning curves plus the 2-D abstraction map with greedy-action labels).

A full training run to a strong policy takes a few thousand episodes; this
demo runs a few hundred to keep the wall time down, so expect a partial
policy. Pass more episodes for the real thing.

Run:  python3 demos/04_office_training.py [episodes] [outdir]
"""

import sys
from pathlib import Path

from treeq import default_config, run_suite
from treeq.plots import emit_plots

episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 400
out = Path(sys.argv[2]) if len(sys.argv) > 2 else Path("office_demo_out")

cfg = default_config("office", "flexible", n_episodes=episodes)
suite = run_suite(cfg, seeds=[0, 1], out_dir=out)

for run in suite.per_seed:
    last = run.metrics[-1]
    print(f"seed {run.seed}: cumulative avg return {last.cumulative_avg_return:.4f}, "
          f"{last.n_state_leaves} state leaves, {last.n_apt_leaves_total} param leaves")
    splits = sum(len(r["splits"]) for r in run.refinements)
    skips = sum(len(r["skips"]) for r in run.refinements)
    print(f"  refinement phases: {len(run.refinements)} ({splits} splits, {skips} skips)")

first = suite.per_seed[0]
written = emit_plots(
    sorted(out.glob("seed_*/metrics.csv")),
    out / "plots",
    out / "seed_0" / "tree.dump",
    first.qtable,
)
print("\nartifacts:")
for p in sorted(out.rglob("*")):
    if p.is_file():
        print(f"  {p}")
