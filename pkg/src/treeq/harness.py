"""End-to-end training runs: alternating learning and refinement phases,
greedy evaluation, multi-seed suites, and artifact emission.

A run is a pure function of (config, seed): the training policy, the
per-episode environment seeds, and the evaluation episodes all draw from
independent deterministic streams derived from the run seed. Timing aside,
two runs with the same inputs produce identical metrics."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .envs import make_env
from .errors import MalformedInput
from .learner import TraceBuffers, epsilon_greedy, execute_abstract, td_lambda_update
from .refinement import (
    BetaSchedule,
    RefineParams,
    compute_heterogeneity,
    refine_step,
    select_targets,
)
from .trees import StateTree

METRICS_COLUMNS = (
    "episode",
    "train_return",
    "cumulative_avg_return",
    "greedy_success_rate",
    "n_state_leaves",
    "n_apt_leaves_total",
    "beta",
    "wall_time_s",
)
METRICS_HEADER = "# treeq-metrics v1: " + ",".join(METRICS_COLUMNS)
AGGREGATE_HEADER = "# treeq-aggregate v1"
QTABLE_FORMAT = "treeq-qtable"


@dataclass
class MetricsRow:
    episode: int
    train_return: float
    cumulative_avg_return: float
    greedy_success_rate: float | None
    n_state_leaves: int
    n_apt_leaves_total: int
    beta: float
    wall_time_s: float


@dataclass
class RunResult:
    seed: int
    metrics: list[MetricsRow]
    tree: StateTree
    qtable: dict
    refinements: list[dict] = field(default_factory=list)


def evaluate_greedy(env, tree: StateTree, Q: dict, episodes: int, seed: int) -> float:
    """Fraction of fresh episodes in which the greedy (epsilon = 0) policy
    reaches a goal state within the horizon. Ties and parameter draws use a
    dedicated generator seeded by `seed`."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xE7A1]))
    successes = 0
    for _ in range(episodes):
        state = env.reset(int(rng.integers(2**62)))
        s_leaf = tree.leaf_of(state)
        steps = 0
        while not env.done and steps < env.horizon:
            action = epsilon_greedy(Q, tree, s_leaf, 0.0, rng)
            at, seg = execute_abstract(
                env, tree, state, s_leaf, action, rng, env.horizon - steps
            )
            steps += at.step_count
            state = seg[-1].next_state
            s_leaf = at.next_leaf
        if env.goal_reached:
            successes += 1
    return successes / episodes


def run_experiment(cfg: ExperimentConfig, seed: int, out_dir=None) -> RunResult:
    """One full training run implementing the learning/refinement loop.

    Per episode: reset, pick an abstract action per visited state leaf,
    execute it until the leaf changes or the episode ends, buffer the
    transitions, and apply the TD(lambda) update. Every `n_refine` episodes
    the buffered dispersions pick refinement targets, the trees split, and
    the buffers clear. Greedy evaluations run every `eval_every` episodes
    on a separate environment instance and RNG stream."""
    env = make_env(cfg.env, cfg.layout, **cfg.env_options())
    eval_env = make_env(cfg.env, cfg.layout, **cfg.env_options())
    tree = StateTree.universal(env.state_space, env.actions)
    Q: dict = {}
    bufs = TraceBuffers()
    beta_h = BetaSchedule(decay=cfg.beta_decay, initial=cfg.beta_initial)
    beta_j = BetaSchedule(
        decay=cfg.beta_decay if cfg.similarity_beta_decay is None else cfg.similarity_beta_decay,
        initial=cfg.beta_initial,
    )
    params = RefineParams(
        mode=cfg.mode,
        variables_to_split=cfg.variables_to_split,
        max_clusters=cfg.max_clusters,
        kernel=cfg.kernel,
        candidate_Cs=cfg.candidate_Cs,
        cluster_start=cfg.cluster_start,
        cluster_step=cfg.cluster_step,
        cluster_linkage=cfg.cluster_linkage,
        cluster_features=cfg.cluster_features,
        max_cluster_points=cfg.max_cluster_points,
        svm_seed=cfg.svm_seed,
        gamma=cfg.gamma,
    )
    action_order = [a.label for a in env.actions]

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x7EA1]))
    env_seeds = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    refine_rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5AFE]))

    eps = 1.0
    metrics: list[MetricsRow] = []
    refinements: list[dict] = []
    return_sum = 0.0
    t0 = time.perf_counter()

    for episode in range(1, cfg.n_episodes + 1):
        state = env.reset(int(env_seeds.integers(2**62)))
        s_leaf = tree.leaf_of(state)
        traces: dict = {}
        steps = 0
        disc = 1.0
        ep_return = 0.0
        while not env.done and steps < cfg.horizon:
            action = epsilon_greedy(Q, tree, s_leaf, eps, rng)
            at, seg = execute_abstract(
                env, tree, state, s_leaf, action, rng, cfg.horizon - steps
            )
            bufs.abstract.append(at)
            bufs.concrete.extend(seg)
            td_lambda_update(Q, traces, tree, at, cfg.alpha, cfg.gamma, cfg.lam)
            for tr in seg:
                ep_return += disc * tr.reward
                disc *= cfg.gamma
            steps += at.step_count
            state = seg[-1].next_state
            s_leaf = at.next_leaf
        eps = max(cfg.eps_min, eps * cfg.eps_decay)
        return_sum += ep_return

        if episode % cfg.n_refine == 0:
            table = compute_heterogeneity(Q, bufs, tree, beta_h.beta, cfg.gamma)
            plan = select_targets(table, cfg.k_cap, cfg.k_cap_actions, action_order)
            record = refine_step(
                tree, Q, bufs, plan, params, table, beta_h, beta_j, refine_rng
            )
            record["episode"] = episode
            refinements.append(record)
            bufs.clear()

        success = None
        if episode % cfg.eval_every == 0:
            success = evaluate_greedy(
                eval_env, tree, Q, cfg.eval_episodes, seed * 1_000_003 + episode
            )

        metrics.append(
            MetricsRow(
                episode=episode,
                train_return=ep_return,
                cumulative_avg_return=return_sum / episode,
                greedy_success_rate=success,
                n_state_leaves=tree.n_leaves,
                n_apt_leaves_total=tree.apt_leaf_total(),
                beta=beta_h.beta,
                wall_time_s=time.perf_counter() - t0,
            )
        )

    result = RunResult(seed, metrics, tree, Q, refinements)
    if out_dir is not None:
        write_run_artifacts(result, out_dir)
    return result


# -- artifacts ---------------------------------------------------------------


def write_metrics_csv(path, metrics: list[MetricsRow]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(METRICS_HEADER + "\n")
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for m in metrics:
            writer.writerow(
                [
                    m.episode,
                    repr(m.train_return),
                    repr(m.cumulative_avg_return),
                    "" if m.greedy_success_rate is None else repr(m.greedy_success_rate),
                    m.n_state_leaves,
                    m.n_apt_leaves_total,
                    repr(m.beta),
                    f"{m.wall_time_s:.3f}",
                ]
            )


def read_metrics_csv(path) -> list[MetricsRow]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise MalformedInput(f"cannot read metrics {path!r}: {exc}") from exc
    rows = [ln for ln in lines if ln and not ln.startswith("#")]
    if not rows or rows[0].split(",") != list(METRICS_COLUMNS):
        raise MalformedInput(f"{path!r} is not a treeq metrics file")
    out = []
    try:
        for rec in csv.reader(rows[1:]):
            out.append(
                MetricsRow(
                    episode=int(rec[0]),
                    train_return=float(rec[1]),
                    cumulative_avg_return=float(rec[2]),
                    greedy_success_rate=float(rec[3]) if rec[3] else None,
                    n_state_leaves=int(rec[4]),
                    n_apt_leaves_total=int(rec[5]),
                    beta=float(rec[6]),
                    wall_time_s=float(rec[7]),
                )
            )
    except (IndexError, ValueError) as exc:
        raise MalformedInput(f"bad metrics row in {path!r}: {exc}") from exc
    return out


def qtable_to_doc(Q: dict) -> dict:
    entries = sorted([k[0], k[1], k[2], v] for k, v in Q.items())
    return {"format": QTABLE_FORMAT, "version": 1, "entries": entries}


def qtable_from_doc(doc: dict) -> dict:
    if not isinstance(doc, dict) or doc.get("format") != QTABLE_FORMAT:
        raise MalformedInput("not a treeq qtable dump")
    return {(int(e[0]), str(e[1]), int(e[2])): float(e[3]) for e in doc["entries"]}


def write_run_artifacts(result: RunResult, out_dir) -> Path:
    run_dir = Path(out_dir) / f"seed_{result.seed}"
    run_dir.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(run_dir / "metrics.csv", result.metrics)
    (run_dir / "tree.dump").write_bytes(result.tree.to_bytes())
    (run_dir / "qtable.dump").write_text(json.dumps(qtable_to_doc(result.qtable)))
    with open(run_dir / "refinements.jsonl", "w") as fh:
        for rec in result.refinements:
            fh.write(json.dumps(rec) + "\n")
    return run_dir


# -- suites ------------------------------------------------------------------


@dataclass
class SuiteResult:
    per_seed: list[RunResult]
    aggregate: list[dict]


def aggregate_metrics(per_seed: list[list[MetricsRow]]) -> list[dict]:
    """Per-episode mean and population SD across seeds for every numeric
    metrics column."""
    n_eps = min(len(m) for m in per_seed)
    out = []
    for i in range(n_eps):
        rows = [m[i] for m in per_seed]
        rec: dict = {"episode": rows[0].episode}
        for col in (
            "train_return",
            "cumulative_avg_return",
            "greedy_success_rate",
            "n_state_leaves",
            "n_apt_leaves_total",
            "beta",
        ):
            vals = [getattr(r, col) for r in rows]
            if any(v is None for v in vals):
                rec[f"mean_{col}"] = None
                rec[f"sd_{col}"] = None
            else:
                arr = np.asarray(vals, dtype=float)
                rec[f"mean_{col}"] = float(arr.mean())
                rec[f"sd_{col}"] = float(arr.std())
        out.append(rec)
    return out


def write_aggregate_csv(path, aggregate: list[dict]) -> None:
    if not aggregate:
        Path(path).write_text(AGGREGATE_HEADER + "\n")
        return
    cols = list(aggregate[0].keys())
    with open(path, "w", newline="") as fh:
        fh.write(AGGREGATE_HEADER + "\n")
        writer = csv.writer(fh)
        writer.writerow(cols)
        for rec in aggregate:
            writer.writerow(["" if rec[c] is None else rec[c] for c in cols])


def _suite_worker(payload: tuple) -> RunResult:
    cfg_dict, seed, out_dir = payload
    return run_experiment(ExperimentConfig.from_dict(cfg_dict), seed, out_dir)


def run_suite(
    cfg: ExperimentConfig,
    seeds=None,
    out_dir=None,
    workers: int = 1,
) -> SuiteResult:
    """Run one experiment per seed (optionally in parallel worker
    processes; each worker owns its environment and trees) and aggregate
    the metric streams. Results are merged in seed order regardless of
    completion order."""
    seeds = list(cfg.seeds if seeds is None else seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    payloads = [(cfg.to_dict(), s, str(out_dir) if out_dir else None) for s in seeds]
    if workers > 1 and len(seeds) > 1:
        with get_context("spawn").Pool(min(workers, len(seeds))) as pool:
            results = pool.map(_suite_worker, payloads)
    else:
        results = [_suite_worker(p) for p in payloads]
    aggregate = aggregate_metrics([r.metrics for r in results])
    if out_dir is not None:
        write_aggregate_csv(Path(out_dir) / "aggregate.csv", aggregate)
    return SuiteResult(results, aggregate)
