"""Tabular TD(lambda) over the abstract state-action space.

The Q table is a plain dict from (state leaf, action label, param leaf) to
float; absent keys read as 0.0 and reads never insert. Eligibility traces
are replacing and live per episode. Abstract actions execute by sampling
concrete parameters uniformly from their parameter-tree leaf at every
concrete step, until the agent leaves the current state leaf or the episode
ends; the collapsed record carries the discounted segment reward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Environment, GroundedAction
from .trees import StateTree

TRACE_FLOOR = 1e-4

QKey = tuple[int, str, int]


@dataclass(frozen=True)
class AbstractAction:
    """Action label plus a leaf of that action's parameter tree at the
    current state leaf."""

    label: str
    param_leaf: int


@dataclass
class AbstractTransition:
    """One collapsed segment of concrete steps sharing (state leaf, abstract
    action). `reward` is the discounted sum of the segment's rewards."""

    s_leaf: int
    action: AbstractAction
    reward: float
    next_leaf: int
    done: bool
    step_count: int


@dataclass
class ConcreteTransition:
    """One concrete step, tagged with the leaves of both endpoint states
    (valid until the next refinement, which clears the buffers)."""

    state: tuple[float, ...]
    action: AbstractAction
    reward: float
    next_state: tuple[float, ...]
    done: bool
    s_leaf: int
    next_leaf: int


@dataclass
class TraceBuffers:
    """Transition stores feeding the refinement statistics; cleared after
    every refinement phase."""

    abstract: list[AbstractTransition] = field(default_factory=list)
    concrete: list[ConcreteTransition] = field(default_factory=list)

    def clear(self) -> None:
        self.abstract.clear()
        self.concrete.clear()


def q_key(s_leaf: int, action: AbstractAction) -> QKey:
    return (s_leaf, action.label, action.param_leaf)


def leaf_actions(tree: StateTree, s_leaf: int) -> list[AbstractAction]:
    """All abstract actions available at a state leaf: every (label,
    param-tree leaf) pair."""
    node = tree.nodes[s_leaf]
    return [
        AbstractAction(label, pl)
        for label, apt in node.apts.items()
        for pl in apt.leaf_ids
    ]


def max_q(Q: dict, tree: StateTree, s_leaf: int) -> float:
    """max over all abstract actions at the leaf; absent entries count 0."""
    node = tree.nodes[s_leaf]
    best = None
    for label, apt in node.apts.items():
        for pl in apt.leaf_ids:
            v = Q.get((s_leaf, label, pl), 0.0)
            if best is None or v > best:
                best = v
    return 0.0 if best is None else best


def td_error(Q: dict, tree: StateTree, t: AbstractTransition, gamma: float) -> float:
    """One-step bootstrapped residual of the abstract Q function. A done
    transition contributes no bootstrap term."""
    boot = 0.0 if t.done else gamma * max_q(Q, tree, t.next_leaf)
    return t.reward + boot - Q.get(q_key(t.s_leaf, t.action), 0.0)


def value_estimate(Q: dict, tree: StateTree, t: ConcreteTransition, gamma: float) -> float:
    """Per-concrete-step value proxy computed from the abstract Q: the
    reward plus the discounted best abstract value at the next state's leaf,
    minus the executed pair's Q at the current state's leaf."""
    boot = 0.0 if t.done else gamma * max_q(Q, tree, t.next_leaf)
    return t.reward + boot - Q.get((t.s_leaf, t.action.label, t.action.param_leaf), 0.0)


def execute_abstract(
    env: Environment,
    tree: StateTree,
    state: tuple[float, ...],
    s_leaf: int,
    action: AbstractAction,
    rng: np.random.Generator,
    steps_left: int,
) -> tuple[AbstractTransition, list[ConcreteTransition]]:
    """Run `action` from `state` (which lies in `s_leaf`), re-sampling its
    parameters every concrete step, until the state leaf changes, the
    episode ends, or `steps_left` runs out."""
    if steps_left < 1:
        raise ValueError("steps_left must be >= 1")
    apt = tree.apt(s_leaf, action.label)
    gamma = env.gamma
    concrete: list[ConcreteTransition] = []
    r_bar = 0.0
    disc = 1.0
    cur = state
    cur_leaf = s_leaf
    for _ in range(steps_left):
        args = apt.sample(action.param_leaf, rng)
        res = env.step(GroundedAction(action.label, args))
        nxt_leaf = tree.leaf_of(res.next_state)
        concrete.append(
            ConcreteTransition(
                cur, action, res.reward, res.next_state, res.done, cur_leaf, nxt_leaf
            )
        )
        r_bar += disc * res.reward
        disc *= gamma
        cur = res.next_state
        cur_leaf = nxt_leaf
        if res.done or nxt_leaf != s_leaf:
            break
    last = concrete[-1]
    abstract = AbstractTransition(
        s_leaf, action, r_bar, last.next_leaf, last.done, len(concrete)
    )
    return abstract, concrete


def td_lambda_update(
    Q: dict,
    traces: dict,
    tree: StateTree,
    t: AbstractTransition,
    alpha: float,
    gamma: float,
    lam: float,
) -> float:
    """Apply one TD(lambda) update with replacing traces. Mutates Q and
    `traces` in place; returns the TD error."""
    delta = td_error(Q, tree, t, gamma)
    traces[q_key(t.s_leaf, t.action)] = 1.0
    decay = gamma * lam
    dead = []
    for k, e in traces.items():
        Q[k] = Q.get(k, 0.0) + alpha * delta * e
        e *= decay
        if e < TRACE_FLOOR:
            dead.append(k)
        else:
            traces[k] = e
    for k in dead:
        del traces[k]
    return delta


def epsilon_greedy(
    Q: dict,
    tree: StateTree,
    s_leaf: int,
    epsilon: float,
    rng: np.random.Generator,
) -> AbstractAction:
    """Uniform over all abstract actions at the leaf with probability
    epsilon, else argmax Q with exact ties broken uniformly at random."""
    options = leaf_actions(tree, s_leaf)
    if not options:
        raise ValueError(f"leaf {s_leaf} has no abstract actions")
    if epsilon > 0.0 and rng.random() < epsilon:
        return options[rng.integers(len(options))]
    best_v = None
    best: list[AbstractAction] = []
    for a in options:
        v = Q.get((s_leaf, a.label, a.param_leaf), 0.0)
        if best_v is None or v > best_v:
            best_v = v
            best = [a]
        elif v == best_v:
            best.append(a)
    if len(best) == 1:
        return best[0]
    return best[rng.integers(len(best))]
