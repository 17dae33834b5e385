"""Vector-graphics artifacts: learning curves with mean/SD bands across
seeds, and a 2-D map of the learned state abstraction with per-region
greedy-action annotations."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import MalformedInput
from .harness import read_metrics_csv
from .learner import leaf_actions
from .trees import StateTree


def _band(ax, episodes, mean, sd, label, color):
    ax.plot(episodes, mean, color=color, label=label)
    ax.fill_between(episodes, mean - sd, mean + sd, color=color, alpha=0.2)


def plot_learning_curves(metrics_files, out_path) -> Path:
    """Cumulative-average-return and greedy-success curves, averaged over
    the given per-seed metrics files. Empty inputs make empty axes."""
    runs = [read_metrics_csv(p) for p in metrics_files]
    fig, (ax_ret, ax_suc) = plt.subplots(1, 2, figsize=(10, 4))
    ax_ret.set_xlabel("episode")
    ax_ret.set_ylabel("cumulative average return")
    ax_suc.set_xlabel("episode")
    ax_suc.set_ylabel("greedy success rate")
    runs = [r for r in runs if r]
    if runs:
        n = min(len(r) for r in runs)
        episodes = np.array([m.episode for m in runs[0][:n]])
        ret = np.array([[m.cumulative_avg_return for m in r[:n]] for r in runs])
        _band(ax_ret, episodes, ret.mean(axis=0), ret.std(axis=0), "return", "tab:blue")
        eval_idx = [
            i for i in range(n)
            if all(r[i].greedy_success_rate is not None for r in runs)
        ]
        if eval_idx:
            ep = episodes[eval_idx]
            suc = np.array(
                [[r[i].greedy_success_rate for i in eval_idx] for r in runs]
            )
            _band(ax_suc, ep, suc.mean(axis=0), suc.std(axis=0), "success", "tab:green")
        ax_suc.set_ylim(-0.05, 1.05)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def plot_abstraction_map(
    tree_dump_path, out_path, qtable: dict | None = None, resolution: int = 220
) -> Path:
    """Color the leaf regions of a state tree over a 2-D slice spanned by
    its first two continuous variables; the remaining variables sit at
    their domain midpoints. Each region is annotated with its greedy action
    label when a Q table is supplied."""
    try:
        tree = StateTree.from_bytes(Path(tree_dump_path).read_bytes())
    except OSError as exc:
        raise MalformedInput(f"cannot read tree dump: {exc}") from exc
    dims = [i for i, v in enumerate(tree.state_space) if v.kind == "continuous"][:2]
    if len(dims) < 2:
        raise MalformedInput("abstraction map needs two continuous state variables")
    dx, dy = dims
    base = [
        v.lo + (v.hi - v.lo) / 2 if i not in (dx, dy) else 0.0
        for i, v in enumerate(tree.state_space)
    ]
    # midpoints of discrete domains round down to a valid code
    for i, v in enumerate(tree.state_space):
        if v.kind == "discrete" and i not in (dx, dy):
            base[i] = float(int(base[i]))

    vx, vy = tree.state_space[dx], tree.state_space[dy]
    xs = np.linspace(vx.lo, vx.hi, resolution, endpoint=False)
    ys = np.linspace(vy.lo, vy.hi, resolution, endpoint=False)
    leaf_order = {leaf: i for i, leaf in enumerate(tree.leaf_ids)}
    grid = np.empty((resolution, resolution), dtype=int)
    state = list(base)
    for r, y in enumerate(ys):
        state[dy] = y
        for c, x in enumerate(xs):
            state[dx] = x
            grid[r, c] = leaf_order[tree.leaf_of(tuple(state))]

    fig, ax = plt.subplots(figsize=(6, 6))
    ax.imshow(
        grid,
        origin="lower",
        extent=(vx.lo, vx.hi, vy.lo, vy.hi),
        cmap="tab20",
        interpolation="nearest",
    )
    ax.set_xlabel(vx.name)
    ax.set_ylabel(vy.name)

    if qtable is not None:
        for leaf, idx in leaf_order.items():
            mask = grid == idx
            if not mask.any():
                continue
            rr, cc = np.nonzero(mask)
            cy, cx = ys[rr].mean(), xs[cc].mean()
            options = leaf_actions(tree, leaf)
            best = max(
                options, key=lambda a: qtable.get((leaf, a.label, a.param_leaf), 0.0)
            )
            ax.text(cx, cy, best.label, ha="center", va="center", fontsize=7)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def emit_plots(
    metrics_files,
    out_dir,
    tree_dump_path=None,
    qtable: dict | None = None,
) -> list[Path]:
    """Write every chart the inputs support and return the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [plot_learning_curves(metrics_files, out_dir / "learning_curves.svg")]
    if tree_dump_path is not None:
        written.append(
            plot_abstraction_map(tree_dump_path, out_dir / "abstraction_map.svg", qtable)
        )
    return written
