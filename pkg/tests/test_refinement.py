import numpy as np
import pytest

from treeq import (
    AbstractTransition,
    RefinementPlan,
    ActionSchema,
    BetaSchedule,
    ConcreteTransition,
    HeterogeneityTable,
    InsufficientData,
    RefineParams,
    StateTree,
    TraceBuffers,
    VariableSpec,
    compute_heterogeneity,
    leaf_actions,
    max_q,
    migrate_q,
    migrate_q_param,
    refine_step,
    select_targets,
    similarity_scores,
    value_estimate,
)


def planar_tree():
    space = (VariableSpec("x", 0.0, 2.0), VariableSpec("y", 0.0, 2.0))
    actions = (
        ActionSchema("a", (VariableSpec("p", 0.0, 1.0),)),
        ActionSchema("b", (VariableSpec("p", 0.0, 1.0),)),
    )
    return StateTree.universal(space, actions)


def abstract(leaf, action, reward, next_leaf, done=True, steps=1):
    return AbstractTransition(leaf, action, reward, next_leaf, done, steps)


def concrete(state, action, reward, next_state, leaf, next_leaf, done=True):
    return ConcreteTransition(state, action, reward, next_state, done, leaf, next_leaf)


# -- beta schedule -------------------------------------------------------------


def test_beta_starts_at_one():
    assert BetaSchedule().beta == 1.0


def test_beta_after_ten_steps():
    sched = BetaSchedule(decay=0.02)
    for _ in range(10):
        sched.step()
    assert sched.beta == pytest.approx(0.8, abs=1e-12)


def test_beta_clamps_at_zero():
    sched = BetaSchedule(decay=0.02)
    for _ in range(60):
        sched.step()
    assert sched.beta == 0.0


# -- heterogeneity -------------------------------------------------------------


def test_identical_deltas_give_zero_score():
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    bufs = TraceBuffers()
    bufs.abstract = [abstract(tree.root, a, 0.7, tree.root) for _ in range(5)]
    table = compute_heterogeneity({}, bufs, tree, beta=1.0, gamma=0.99)
    assert table.per_pair[(tree.root, a.label, a.param_leaf)] == 0.0


def test_delta_dispersion_population_sd():
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    bufs = TraceBuffers()
    bufs.abstract = [
        abstract(tree.root, a, 0.0, tree.root),
        abstract(tree.root, a, 2.0, tree.root),
    ]
    table = compute_heterogeneity({}, bufs, tree, beta=1.0, gamma=0.99)
    assert table.per_pair[(tree.root, a.label, a.param_leaf)] == pytest.approx(1.0)


def test_blended_score_substitution():
    # delta SD 1.0 from abstract rewards {0, 2}; value SD 3.0 from concrete
    # rewards {0, 6}; beta 0.25 blends to 0.25*1 + 0.75*3 = 2.5
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    bufs = TraceBuffers()
    bufs.abstract = [
        abstract(tree.root, a, 0.0, tree.root),
        abstract(tree.root, a, 2.0, tree.root),
    ]
    bufs.concrete = [
        concrete((0.1, 0.1), a, 0.0, (0.2, 0.2), tree.root, tree.root),
        concrete((1.5, 1.5), a, 6.0, (1.6, 1.6), tree.root, tree.root),
    ]
    table = compute_heterogeneity({}, bufs, tree, beta=0.25, gamma=0.99)
    assert table.per_pair[(tree.root, a.label, a.param_leaf)] == pytest.approx(2.5)


def test_single_sample_contributes_zero():
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    bufs = TraceBuffers()
    bufs.abstract = [abstract(tree.root, a, 5.0, tree.root)]
    table = compute_heterogeneity({}, bufs, tree, beta=1.0, gamma=0.99)
    assert table.per_pair[(tree.root, a.label, a.param_leaf)] == 0.0


def test_score_permutation_invariant(rng):
    tree = planar_tree()
    a, b = leaf_actions(tree, tree.root)[:2]
    bufs = TraceBuffers()
    for r in rng.uniform(0, 1, 30):
        bufs.abstract.append(abstract(tree.root, a if r < 0.5 else b, r, tree.root))
        bufs.concrete.append(
            concrete((r, r), a, r * 2, (r, r), tree.root, tree.root)
        )
    t1 = compute_heterogeneity({}, bufs, tree, 0.5, 0.99)
    order = rng.permutation(len(bufs.abstract))
    bufs.abstract = [bufs.abstract[i] for i in order]
    bufs.concrete = [bufs.concrete[i] for i in order]
    t2 = compute_heterogeneity({}, bufs, tree, 0.5, 0.99)
    for k in t1.per_pair:
        assert t1.per_pair[k] == pytest.approx(t2.per_pair[k], abs=1e-12)


def test_beta_one_ignores_concrete_term():
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    bufs = TraceBuffers()
    bufs.abstract = [abstract(tree.root, a, 1.0, tree.root)] * 3
    bufs.concrete = [
        concrete((0.1, 0.1), a, 0.0, (0.2, 0.2), tree.root, tree.root),
        concrete((1.5, 1.5), a, 6.0, (1.6, 1.6), tree.root, tree.root),
    ]
    table = compute_heterogeneity({}, bufs, tree, beta=1.0, gamma=0.99)
    assert table.per_pair[(tree.root, a.label, a.param_leaf)] == 0.0


def test_beta_zero_ignores_abstract_term():
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    bufs = TraceBuffers()
    bufs.abstract = [
        abstract(tree.root, a, 0.0, tree.root),
        abstract(tree.root, a, 2.0, tree.root),
    ]
    bufs.concrete = [
        concrete((0.1, 0.1), a, 3.0, (0.2, 0.2), tree.root, tree.root),
    ] * 2
    table = compute_heterogeneity({}, bufs, tree, beta=0.0, gamma=0.99)
    assert table.per_pair[(tree.root, a.label, a.param_leaf)] == 0.0


# -- target selection ----------------------------------------------------------


def test_empty_table_empty_plan():
    plan = select_targets(HeterogeneityTable(), 5, 5)
    assert plan.state_targets == [] and plan.action_targets == []


def test_top_k_states():
    table = HeterogeneityTable(
        per_pair={(1, "a", 0): 5.0, (2, "a", 0): 3.0, (3, "a", 0): 1.0},
        per_state={1: 5.0, 2: 3.0, 3: 1.0},
    )
    plan = select_targets(table, 2, 0)
    assert plan.state_targets == [1, 2]


def test_tie_broken_by_lower_leaf_id():
    table = HeterogeneityTable(
        per_pair={(9, "a", 0): 2.0, (4, "a", 0): 2.0},
        per_state={9: 2.0, 4: 2.0},
    )
    plan = select_targets(table, 1, 1)
    assert plan.state_targets == [4]
    assert plan.action_targets == [(4, "a", 0)]


def test_zero_scores_excluded():
    table = HeterogeneityTable(per_pair={(1, "a", 0): 0.0}, per_state={1: 0.0})
    plan = select_targets(table, 3, 3)
    assert plan.state_targets == [] and plan.action_targets == []


# -- similarity ----------------------------------------------------------------


def test_similarity_zero_everywhere():
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    bufs = TraceBuffers()
    bufs.concrete = [
        concrete((0.1, 0.1), a, 0.0, (0.2, 0.2), tree.root, tree.root),
        concrete((0.3, 0.3), a, 0.0, (0.4, 0.4), tree.root, tree.root),
    ]
    scores = similarity_scores({}, bufs.concrete, tree, tree.root,
                               HeterogeneityTable(), 0.5, 0.99)
    assert all(v == 0.0 for v in scores.values())


@pytest.mark.parametrize("beta", [1.0, 0.0])
def test_similarity_endpoints_match_value_estimate(beta):
    # both blended terms are the executed-transition residual, so each
    # endpoint must equal the value estimate exactly
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    Q = {(tree.root, a.label, a.param_leaf): 0.4}
    bufs = TraceBuffers()
    bufs.concrete = [
        concrete((0.1, 0.1), a, 1.0, (0.2, 0.2), tree.root, tree.root, done=False),
        concrete((0.3, 0.3), a, 0.0, (0.4, 0.4), tree.root, tree.root, done=False),
    ]
    scores = similarity_scores(Q, bufs.concrete, tree, tree.root,
                               HeterogeneityTable(), beta, 0.99)
    for i, t in enumerate(bufs.concrete):
        assert scores[i] == pytest.approx(value_estimate(Q, tree, t, 0.99), abs=1e-15)


def test_similarity_needs_two_transitions():
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    buf = [concrete((0.1, 0.1), a, 0.0, (0.2, 0.2), tree.root, tree.root)]
    with pytest.raises(InsufficientData):
        similarity_scores({}, buf, tree, tree.root, HeterogeneityTable(), 1.0, 0.99)


# -- migration -----------------------------------------------------------------


def test_migrate_copies_rows_and_drops_parent():
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    Q = {(tree.root, a.label, a.param_leaf): 0.7}
    children = tree.refine_uniform(tree.root, 1)
    migrate_q(Q, tree.root, children)
    for c in children:
        assert Q[(c, a.label, a.param_leaf)] == 0.7
    assert (tree.root, a.label, a.param_leaf) not in Q


def test_migrate_preserves_greedy_argmax(rng):
    tree = planar_tree()
    opts = leaf_actions(tree, tree.root)
    Q = {(tree.root, o.label, o.param_leaf): rng.normal() for o in opts}
    best_before = max(opts, key=lambda o: Q[(tree.root, o.label, o.param_leaf)])
    val_before = max_q(Q, tree, tree.root)
    children = tree.refine_uniform(tree.root, 2)
    migrate_q(Q, tree.root, children)
    for c in children:
        copts = leaf_actions(tree, c)
        best = max(copts, key=lambda o: Q.get((c, o.label, o.param_leaf), 0.0))
        assert best.label == best_before.label
        assert max_q(Q, tree, c) == val_before


def test_migrate_row_count_arithmetic():
    tree = planar_tree()
    opts = leaf_actions(tree, tree.root)
    Q = {(tree.root, o.label, o.param_leaf): 1.0 for o in opts}
    rows_before = len(Q)
    children = tree.refine_uniform(tree.root, 2)
    migrate_q(Q, tree.root, children)
    assert len(Q) == rows_before + (len(children) - 1) * rows_before


def test_param_migration_copies_value():
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    Q = {(tree.root, a.label, a.param_leaf): 0.9}
    apt = tree.apt(tree.root, a.label)
    children = apt.refine_uniform(a.param_leaf)
    migrate_q_param(Q, tree.root, a.label, a.param_leaf, children)
    assert all(Q[(tree.root, a.label, c)] == 0.9 for c in children)
    assert (tree.root, a.label, a.param_leaf) not in Q


# -- refine_step ---------------------------------------------------------------


def _params(mode, **kw):
    defaults = dict(mode=mode, variables_to_split=2, max_clusters=3,
                    kernel="linear", gamma=0.99)
    defaults.update(kw)
    return RefineParams(**defaults)


def test_uniform_refine_step_quadrants(rng):
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    bufs = TraceBuffers()
    table = HeterogeneityTable(per_pair={}, per_state={})
    plan = RefinementPlan(state_targets=[tree.root])
    before = tree.n_leaves
    refine_step(tree, {}, bufs, plan, _params("uniform"), table,
                BetaSchedule(), BetaSchedule(), rng)
    assert tree.n_leaves == before + 3


def test_empty_plan_still_steps_beta(rng):
    tree = planar_tree()
    beta_h, beta_j = BetaSchedule(), BetaSchedule()
    record = refine_step(tree, {}, TraceBuffers(), RefinementPlan(),
                         _params("uniform"), HeterogeneityTable(),
                         beta_h, beta_j, np.random.default_rng(0))
    assert tree.n_leaves == 1
    assert beta_h.refinements_done == 1
    assert beta_j.refinements_done == 1
    assert record["splits"] == []


def test_flexible_refine_recovers_planted_regions(rng):
    # rewards differ across x < 1 vs x >= 1, so the similarity signal is
    # two-valued and the classifier should recover the planted boundary
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    bufs = TraceBuffers()
    for _ in range(400):
        x, y = rng.uniform(0, 2), rng.uniform(0, 2)
        reward = 1.0 if x >= 1.0 else 0.0
        bufs.concrete.append(
            concrete((x, y), a, reward, (x, y), tree.root, tree.root)
        )
        bufs.abstract.append(abstract(tree.root, a, reward, tree.root))
    table = compute_heterogeneity({}, bufs, tree, 1.0, 0.99)
    plan = RefinementPlan(state_targets=[tree.root])
    record = refine_step(tree, {}, bufs, plan, _params("flexible"), table,
                         BetaSchedule(), BetaSchedule(), rng)
    assert tree.n_leaves == 2
    agree = 0
    label_by_side = {}
    for _ in range(1000):
        s = (rng.uniform(0, 2), rng.uniform(0, 2))
        side = int(s[0] >= 1.0)
        leaf = tree.leaf_of(s)
        label_by_side.setdefault(side, leaf)
        agree += leaf == label_by_side[side]
    assert agree >= 950


def test_flexible_single_cluster_skipped(rng):
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    bufs = TraceBuffers()
    for _ in range(50):
        x, y = rng.uniform(0, 2), rng.uniform(0, 2)
        bufs.concrete.append(concrete((x, y), a, 0.5, (x, y), tree.root, tree.root))
    plan = RefinementPlan(state_targets=[tree.root])
    record = refine_step(tree, {}, bufs, plan, _params("flexible"),
                         HeterogeneityTable(), BetaSchedule(), BetaSchedule(), rng)
    assert tree.n_leaves == 1
    assert record["skips"] and record["skips"][0]["reason"] == "single cluster"


def test_action_targets_refine_param_trees(rng):
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    Q = {(tree.root, a.label, a.param_leaf): 0.3}
    plan = RefinementPlan(action_targets=[(tree.root, a.label, a.param_leaf)])
    refine_step(tree, Q, TraceBuffers(), plan, _params("uniform"),
                HeterogeneityTable(), BetaSchedule(), BetaSchedule(), rng)
    apt = tree.apt(tree.root, a.label)
    assert apt.n_leaves == 2
    assert all(Q[(tree.root, a.label, leaf)] == 0.3 for leaf in apt.leaf_ids)


def test_action_targets_processed_before_state_split(rng):
    # the same leaf is both an action and a state target; children must
    # inherit the refined parameter tree
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    plan = RefinementPlan(
        state_targets=[tree.root],
        action_targets=[(tree.root, a.label, a.param_leaf)],
    )
    refine_step(tree, {}, TraceBuffers(), plan, _params("uniform"),
                HeterogeneityTable(), BetaSchedule(), BetaSchedule(), rng)
    for leaf in tree.leaf_ids:
        assert tree.apt(leaf, a.label).n_leaves == 2


def test_refine_step_never_loses_coverage(rng):
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    bufs = TraceBuffers()
    for _ in range(200):
        x, y = rng.uniform(0, 2), rng.uniform(0, 2)
        bufs.concrete.append(
            concrete((x, y), a, float(x > 1), (x, y), tree.root, tree.root)
        )
        bufs.abstract.append(abstract(tree.root, a, float(x > 1), tree.root))
    table = compute_heterogeneity({}, bufs, tree, 1.0, 0.99)
    plan = RefinementPlan(state_targets=[tree.root])
    refine_step(tree, {}, bufs, plan, _params("flexible", max_clusters=3), table,
                BetaSchedule(), BetaSchedule(), rng)
    for _ in range(2000):
        s = (rng.uniform(0, 2), rng.uniform(0, 2))
        owners = [lid for lid in tree.leaf_ids if tree.leaf_contains(lid, s)]
        assert len(owners) == 1


def test_flexible_children_bounded_by_max_clusters(rng):
    tree = planar_tree()
    a = leaf_actions(tree, tree.root)[0]
    bufs = TraceBuffers()
    for _ in range(300):
        x, y = rng.uniform(0, 2), rng.uniform(0, 2)
        reward = float(np.digitize(x, [0.5, 1.0, 1.5])) / 3.0
        bufs.concrete.append(concrete((x, y), a, reward, (x, y), tree.root, tree.root))
        bufs.abstract.append(abstract(tree.root, a, reward, tree.root))
    table = compute_heterogeneity({}, bufs, tree, 1.0, 0.99)
        for max_clusters in (2, 3):
        t = planar_tree()
    plan = RefinementPlan(state_targets=[t.root])
        refine_step(t, {}, bufs, plan, _params("flexible", max_clusters=max_clusters),
                    table, BetaSchedule(), BetaSchedule(), rng)
        assert t.n_leaves <= max_clusters
