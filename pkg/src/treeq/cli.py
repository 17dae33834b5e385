"""Command-line front end: train, eval, plot, validate-layout, dump-tree.

Usage errors exit 2 (argparse convention); runtime failures print a
diagnostic to stderr and exit 1."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ExperimentConfig, named_config
from .envs import make_env, validate_layout
from .errors import TreeqError
from .harness import evaluate_greedy, qtable_from_doc, run_suite
from .trees import StateTree


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s]


def _coerce(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def _load_config(spec: str, overrides) -> ExperimentConfig:
    if Path(spec).exists():
        cfg = ExperimentConfig.from_file(spec)
    else:
        cfg = named_config(spec)
    if overrides:
        d = cfg.to_dict()
        for item in overrides:
            key, _, value = item.partition("=")
            d[key] = _coerce(value)
        cfg = ExperimentConfig.from_dict(d)
    return cfg


def cmd_train(args) -> int:
    cfg = _load_config(args.config, args.set)
    seeds = _parse_seeds(args.seeds) if args.seeds else list(cfg.seeds)
    if args.episodes:
        d = cfg.to_dict()
        d["n_episodes"] = args.episodes
        cfg = ExperimentConfig.from_dict(d)
    suite = run_suite(cfg, seeds=seeds, out_dir=args.out, workers=args.workers)
    for run in suite.per_seed:
        last = run.metrics[-1]
        print(
            f"seed {run.seed}: episodes={last.episode} "
            f"avg_return={last.cumulative_avg_return:.4f} "
            f"state_leaves={last.n_state_leaves}"
        )
    print(f"artifacts in {args.out}")
    return 0


def cmd_eval(args) -> int:
    cfg = _load_config(args.config, args.set)
    run_dir = Path(args.run_dir)
    tree = StateTree.from_bytes((run_dir / "tree.dump").read_bytes())
    qtable = qtable_from_doc(json.loads((run_dir / "qtable.dump").read_text()))
    env = make_env(cfg.env, cfg.layout, **cfg.env_options())
    rate = evaluate_greedy(env, tree, qtable, args.episodes, args.seed)
    print(f"greedy success rate: {rate:.4f} over {args.episodes} episodes")
    return 0


def cmd_plot(args) -> int:
    from .plots import emit_plots

    runs = Path(args.runs)
    metrics = sorted(runs.glob("seed_*/metrics.csv"))
    if not metrics:
        print(f"no seed_*/metrics.csv under {runs}", file=sys.stderr)
        return 1
    qtable = None
    if args.qtable:
        qtable = qtable_from_doc(json.loads(Path(args.qtable).read_text()))
    written = emit_plots(metrics, args.out, args.tree, qtable)
    for p in written:
        print(p)
    return 0


def cmd_validate_layout(args) -> int:
    try:
        doc = json.loads(Path(args.layout).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"unreadable layout: {exc}", file=sys.stderr)
        return 1
    problems = validate_layout(doc)
    if problems:
        for p in problems:
            print(p, file=sys.stderr)
        return 1
    print(f"{args.layout}: ok")
    return 0


def cmd_dump_tree(args) -> int:
    tree = StateTree.from_bytes(Path(args.tree).read_bytes())
    if args.json:
        print(json.dumps(tree.to_doc(), indent=2))
    else:
        print(f"state leaves: {tree.n_leaves}")
        print(f"param leaves: {tree.apt_leaf_total()}")
        print(f"nodes: {len(tree.nodes)}")
        depth = {tree.root: 0}
        for nid, node in tree.nodes.items():
            cur, d = nid, 0
            while tree.nodes[cur].parent is not None:
                cur = tree.nodes[cur].parent
                d += 1
            depth[nid] = d
        print(f"max depth: {max(depth.values())}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treeq",
        description="Tabular TD(lambda) over learned partition-tree abstractions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run a training suite")
    p.add_argument("--config", required=True, help="preset name (e.g. office_flexible) or JSON path")
    p.add_argument("--seeds", help="comma list or lo..hi range (default: config seeds)")
    p.add_argument("--episodes", type=int, help="override n_episodes")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config field")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved run's greedy policy")
    p.add_argument("--config", required=True)
    p.add_argument("--run-dir", required=True, help="directory with tree.dump and qtable.dump")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("plot", help="render charts from run artifacts")
    p.add_argument("--runs", required=True, help="suite output directory")
    p.add_argument("--out", required=True)
    p.add_argument("--tree", help="tree.dump for the abstraction map")
    p.add_argument("--qtable", help="qtable.dump for greedy annotations")
    p.set_defaults(fn=cmd_plot)

    p = sub.add_parser("validate-layout", help="check a layout file")
    p.add_argument("layout")
    p.set_defaults(fn=cmd_validate_layout)

    p = sub.add_parser("dump-tree", help="summarize or print a tree dump")
    p.add_argument("--tree", required=True)
    p.add_argument("--json", action="store_true", help="print the full document")
    p.set_defaults(fn=cmd_dump_tree)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (TreeqError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
