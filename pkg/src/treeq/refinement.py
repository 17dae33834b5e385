"""Refinement scheduling: scores abstraction elements by the dispersion of
their learning signals, selects the top-k, and drives uniform or flexible
splits of the state tree plus uniform splits of parameter trees.

The score blends two population standard deviations with an annealed weight
beta: the TD errors of an abstract state-action pair (over the abstract
buffer) and the per-step value estimates of the concrete states inside an
abstract state (over the concrete buffer). Beta starts at 1 and decays by a
fixed amount at every refinement phase, shifting trust from TD-error
dispersion early to value dispersion late. Groups with fewer than two
samples contribute zero; dispersion over a singleton is undefined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .clustering import adaptive_cluster
from .errors import DegenerateModel, InsufficientData, SingleClass, UnsplittableLeaf
from .learner import QKey, TraceBuffers, max_q, q_key, td_error, value_estimate
from .svm import DEFAULT_CANDIDATE_CS, svm_train
from .trees import StateTree


@dataclass
class BetaSchedule:
    """Annealed blend weight: beta = max(0, initial - decay * refinements_done).
    The ablation endpoints are decay=0 (fixed at `initial`) and initial=0
    (value-dispersion only)."""

    decay: float = 0.02
    refinements_done: int = 0
    initial: float = 1.0

    @property
    def beta(self) -> float:
        return max(0.0, self.initial - self.decay * self.refinements_done)

    def step(self) -> None:
        self.refinements_done += 1


@dataclass
class HeterogeneityTable:
    """Refinement scores: per (state leaf, abstract action) pair and the
    per-leaf max over its pairs."""

    per_pair: dict[QKey, float] = field(default_factory=dict)
    per_state: dict[int, float] = field(default_factory=dict)


def _population_sd(values: list[float]) -> float:
    return float(np.std(np.asarray(values))) if len(values) >= 2 else 0.0


def compute_heterogeneity(
    Q: dict,
    bufs: TraceBuffers,
    tree: StateTree,
    beta: float,
    gamma: float,
) -> HeterogeneityTable:
    """Score every abstract pair seen in the buffers. TD errors and value
    estimates are recomputed against the current Q table."""
    delta_groups: dict[QKey, list[float]] = {}
    for t in bufs.abstract:
        delta_groups.setdefault(q_key(t.s_leaf, t.action), []).append(
            td_error(Q, tree, t, gamma)
        )
    vhat_groups: dict[int, list[float]] = {}
    for t in bufs.concrete:
        vhat_groups.setdefault(t.s_leaf, []).append(value_estimate(Q, tree, t, gamma))

    value_sd = {leaf: _population_sd(v) for leaf, v in vhat_groups.items()}
    table = HeterogeneityTable()
    for key, deltas in delta_groups.items():
        h = beta * _population_sd(deltas) + (1.0 - beta) * value_sd.get(key[0], 0.0)
        table.per_pair[key] = h
        leaf = key[0]
        if h > table.per_state.get(leaf, -1.0):
            table.per_state[leaf] = h
    return table


@dataclass
class RefinementPlan:
    """Top-scoring refinement targets, highest score first."""

    state_targets: list[int] = field(default_factory=list)
    action_targets: list[QKey] = field(default_factory=list)


def select_targets(
    table: HeterogeneityTable,
    k_cap: int,
    k_cap_actions: int,
    action_order: Sequence[str] = (),
) -> RefinementPlan:
    """Pick the k_cap highest-scoring state leaves and the k_cap_actions
    highest-scoring pairs (positive scores only). Ties break on lower leaf
    id, then position in `action_order`, then param leaf."""
    rank = {label: i for i, label in enumerate(action_order)}
    states = sorted(
        ((h, leaf) for leaf, h in table.per_state.items() if h > 0.0),
        key=lambda x: (-x[0], x[1]),
    )
    pairs = sorted(
        ((h, k) for k, h in table.per_pair.items() if h > 0.0),
        key=lambda x: (-x[0], x[1][0], rank.get(x[1][1], x[1][1]), x[1][2]),
    )
    return RefinementPlan(
        [leaf for _, leaf in states[: max(0, k_cap)]],
        [k for _, k in pairs[: max(0, k_cap_actions)]],
    )


def similarity_scores(
    Q: dict,
    concrete_buf: Sequence,
    tree: StateTree,
    s_leaf: int,
    table: HeterogeneityTable,
    beta: float,
    gamma: float,
) -> dict[int, float]:
    """Per-transition clustering signal for one state leaf: the beta blend
    of the estimated TD residual and the value estimate of each concrete
    transition whose state lies in the leaf, both taken over the transition
    actually executed. Keys are buffer indices."""
    idxs = [i for i, t in enumerate(concrete_buf) if t.s_leaf == s_leaf]
    if len(idxs) < 2:
        raise InsufficientData(f"leaf {s_leaf} has {len(idxs)} concrete transitions")
    out: dict[int, float] = {}
    for i in idxs:
        t = concrete_buf[i]
        boot = 0.0 if t.done else gamma * max_q(Q, tree, t.next_leaf)
        executed_q = Q.get((t.s_leaf, t.action.label, t.action.param_leaf), 0.0)
        delta_hat = t.reward + boot - executed_q
        v_hat = value_estimate(Q, tree, t, gamma)
        out[i] = beta * delta_hat + (1.0 - beta) * v_hat
    return out


def migrate_q(Q: dict, parent_leaf: int, children: Sequence[int]) -> None:
    """Copy every Q row of a split state leaf to each child, then drop the
    parent rows. Children keep the parent's param-leaf ids, so rows carry
    over unchanged."""
    rows = [(k, v) for k, v in Q.items() if k[0] == parent_leaf]
    for (_, label, pl), v in rows:
        for c in children:
            Q[(c, label, pl)] = v
    for k, _ in rows:
        del Q[k]


def migrate_q_param(
    Q: dict, s_leaf: int, label: str, parent_param_leaf: int, children: Sequence[int]
) -> None:
    """Copy the Q value of a split param leaf into both child leaves."""
    key = (s_leaf, label, parent_param_leaf)
    if key in Q:
        v = Q.pop(key)
        for c in children:
            Q[(s_leaf, label, c)] = v


@dataclass
class RefineParams:
    """Knobs consumed by one refinement phase."""

    mode: str  # "uniform" | "flexible"
    variables_to_split: int = 1
    max_clusters: int = 2
    kernel: str = "linear"
    candidate_Cs: tuple[float, ...] = DEFAULT_CANDIDATE_CS
    cluster_start: float = 0.1
    cluster_step: float = 0.001
    cluster_linkage: str = "ward"
    cluster_features: str = "similarity"  # or "state+similarity"
    max_cluster_points: int = 256
    svm_seed: int = 0
    gamma: float = 0.99


def refine_step(
    tree: StateTree,
    Q: dict,
    bufs: TraceBuffers,
    plan: RefinementPlan,
    params: RefineParams,
    score_table: HeterogeneityTable,
    beta_h: BetaSchedule,
    beta_j: BetaSchedule,
    rng: np.random.Generator,
) -> dict:
    """Apply one refinement phase and return its log record.

    Action targets split first so state splits inherit the refined param
    trees. Statistical failures on a target (too little data, one cluster,
    degenerate classifier, unsplittable leaf) skip that target and are
    logged; they never abort the phase. Both beta schedules advance exactly
    once, even for an empty plan. The caller clears the buffers.
    """
    record: dict = {
        "beta": beta_h.beta,
        "state_targets": [
            {"leaf": leaf, "score": score_table.per_state.get(leaf, 0.0)}
            for leaf in plan.state_targets
        ],
        "action_targets": [
            {"leaf": k[0], "action": k[1], "param_leaf": k[2],
             "score": score_table.per_pair.get(k, 0.0)}
            for k in plan.action_targets
        ],
        "splits": [],
        "skips": [],
        "n_state_leaves_before": tree.n_leaves,
    }

    # cluster/classifier inputs are computed against the un-mutated tree and
    # Q so later splits in the same phase cannot skew earlier targets
    flexible_inputs: dict[int, tuple[np.ndarray, np.ndarray, float]] = {}
    if params.mode == "flexible":
        for leaf in plan.state_targets:
            try:
                scores = similarity_scores(
                    Q, bufs.concrete, tree, leaf, score_table, beta_j.beta, params.gamma
                )
            except InsufficientData as exc:
                record["skips"].append({"leaf": leaf, "reason": str(exc)})
                continue
            idxs = np.array(sorted(scores))
            if len(idxs) > params.max_cluster_points:
                pick = rng.choice(len(idxs), size=params.max_cluster_points, replace=False)
                idxs = idxs[np.sort(pick)]
            j = np.array([scores[i] for i in idxs])
            states = np.array([bufs.concrete[i].state for i in idxs])
            if params.cluster_features == "state+similarity":
                points = np.column_stack([states, j])
            else:
                points = j[:, None]
            flexible_inputs[leaf] = (points, states)

    for key in plan.action_targets:
        s_leaf, label, param_leaf = key
        try:
            children = tree.apt(s_leaf, label).refine_uniform(param_leaf)
        except UnsplittableLeaf as exc:
            record["skips"].append({"pair": list(key), "reason": str(exc)})
            continue
        migrate_q_param(Q, s_leaf, label, param_leaf, children)
        record["splits"].append(
            {"kind": "param", "leaf": s_leaf, "action": label,
             "param_leaf": param_leaf, "children": len(children)}
        )

    for leaf in plan.state_targets:
        if params.mode == "uniform":
            try:
                children = tree.refine_uniform(leaf, params.variables_to_split)
            except UnsplittableLeaf as exc:
                record["skips"].append({"leaf": leaf, "reason": str(exc)})
                continue
            migrate_q(Q, leaf, children)
            record["splits"].append(
                {"kind": "state-uniform", "leaf": leaf, "children": len(children)}
            )
        else:
            if leaf not in flexible_inputs:
                continue  # skip already recorded
            points, states = flexible_inputs[leaf]
            cres = adaptive_cluster(
                points,
                start=params.cluster_start,
                step=params.cluster_step,
                max_clusters=params.max_clusters,
                linkage=params.cluster_linkage,
            )
            if cres.n_clusters < 2:
                record["skips"].append({"leaf": leaf, "reason": "single cluster"})
                continue
            try:
                model = svm_train(
                    states, cres.labels, params.kernel, params.candidate_Cs, params.svm_seed
                )
                children = tree.refine_flexible(leaf, model)
            except (SingleClass, DegenerateModel) as exc:
                record["skips"].append({"leaf": leaf, "reason": str(exc)})
                continue
            migrate_q(Q, leaf, children)
            record["splits"].append(
                {"kind": "state-flexible", "leaf": leaf, "children": len(children),
                 "clusters": cres.n_clusters, "threshold_used": cres.threshold_used}
            )

    beta_h.step()
    beta_j.step()
    record["n_state_leaves_after"] = tree.n_leaves
    record["n_param_leaves_after"] = tree.apt_leaf_total()
    return record
