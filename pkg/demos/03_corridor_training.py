"""Train the full learner on the 1-D corridor and watch the abstraction
grow: the agent starts with a single state region and a single parameter
interval, and refinement carves out finer distance control near the goal.

Run:  python3 demos/03_corridor_training.py
"""

from treeq import default_config, evaluate_greedy, run_experiment
from treeq.envs import make_corridor

cfg = default_config("corridor", "flexible", n_episodes=1000)
print(f"config: n_refine={cfg.n_refine}, k_cap={cfg.k_cap}, "
      f"alpha={cfg.alpha}, lambda={cfg.lam}")

res = run_experiment(cfg, seed=0)

print("\nepisode  return  leaves  param-leaves  beta  greedy-success")
for m in res.metrics:
    if m.episode % 100 == 0:
        success = "-" if m.greedy_success_rate is None else f"{m.greedy_success_rate:.2f}"
        print(f"{m.episode:7d}  {m.train_return:6.3f}  {m.n_state_leaves:6d}  "
              f"{m.n_apt_leaves_total:12d}  {m.beta:.2f}  {success}")

# The learned parameter abstraction: how fine is the distance control at
# the starting region?
start_leaf = res.tree.leaf_of((0.0,))
apt = res.tree.apt(start_leaf, "move")
boxes = sorted((apt.nodes[l].lo[0], apt.nodes[l].hi[0]) for l in apt.leaf_ids)
print("\ndistance intervals at the start region:")
for lo, hi in boxes:
    q = res.qtable.get((start_leaf, "move", apt.leaf_of(((lo + hi) / 2,))), 0.0)
    print(f"  [{lo:.4f}, {hi:.4f})  Q={q:.3f}")

env = make_corridor(horizon=cfg.horizon, gamma=cfg.gamma)
rate = evaluate_greedy(env, res.tree, res.qtable, episodes=200, seed=1)
print(f"\ngreedy success over 200 fresh episodes: {rate:.2f}")
