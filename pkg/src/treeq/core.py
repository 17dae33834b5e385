"""Factored MDP formalism: bounded state variables, parameterized actions,
and the environment contract every benchmark implements.

States are plain float tuples ordered like the environment's variable list.
All variable and parameter domains are half-open intervals [lo, hi);
discrete-ordered domains use the integer codes lo, lo+1, ..., hi-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EpisodeFinished, OutOfDomainAction

CONTINUOUS = "continuous"
DISCRETE = "discrete"


@dataclass(frozen=True)
class VariableSpec:
    """One bounded state variable or action parameter.

    `lo` is inclusive, `hi` exclusive. For kind "discrete" the legal values
    are the integers in [lo, hi).
    """

    name: str
    lo: float
    hi: float
    kind: str = CONTINUOUS

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not self.lo < self.hi:
            raise ValueError(f"variable {self.name}: need lo < hi, got [{self.lo}, {self.hi})")
        if self.kind not in (CONTINUOUS, DISCRETE):
            raise ValueError(f"variable {self.name}: unknown kind {self.kind!r}")
        if self.kind == DISCRETE and (self.lo != int(self.lo) or self.hi != int(self.hi)):
            raise ValueError(f"variable {self.name}: discrete bounds must be integers")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float) -> bool:
        return self.lo <= value < self.hi

    def to_dict(self) -> dict:
        return {"name": self.name, "lo": self.lo, "hi": self.hi, "kind": self.kind}

    @classmethod
    def from_dict(cls, d: dict) -> "VariableSpec":
        return cls(d["name"], float(d["lo"]), float(d["hi"]), d["kind"])


@dataclass(frozen=True)
class ActionSchema:
    """Action label plus the ordered parameter domains.

    `params` may be empty (a parameterless action).
    """

    label: str
    params: tuple[VariableSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))

    def validate_args(self, args: Sequence[float]) -> None:
        if len(args) != len(self.params):
            raise OutOfDomainAction(
                f"{self.label}: expected {len(self.params)} args, got {len(args)}"
            )
        for spec, v in zip(self.params, args):
            if not spec.contains(v):
                raise OutOfDomainAction(
                    f"{self.label}: arg {spec.name}={v} outside [{spec.lo}, {spec.hi})"
                )

    def to_dict(self) -> dict:
        return {"label": self.label, "params": [p.to_dict() for p in self.params]}

    @classmethod
    def from_dict(cls, d: dict) -> "ActionSchema":
        return cls(d["label"], tuple(VariableSpec.from_dict(p) for p in d["params"]))


@dataclass(frozen=True)
class GroundedAction:
    """An action with all parameters bound to concrete values."""

    label: str
    args: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(float(a) for a in self.args))


@dataclass
class StepResult:
    """Outcome of one environment step."""

    next_state: tuple[float, ...]
    reward: float
    done: bool
    goal_reached: bool = False

    def __post_init__(self):
        if self.goal_reached and not self.done:
            raise ValueError("goal_reached implies done")


def state_in_bounds(state: Sequence[float], space: Sequence[VariableSpec]) -> bool:
    return len(state) == len(space) and all(
        spec.contains(v) for spec, v in zip(space, state)
    )


class Environment:
    """Episodic factored goal-oriented MDP with parameterized actions.

    Subclasses set `state_space`, `actions`, `horizon`, `gamma`, and
    implement `_initial_state()` and `_transition(label, args)`.
    `_transition` returns (next_state, reward, done, goal_reached) and may
    draw from `self.rng`; given equal seeds and equal grounded-action
    sequences, trajectories are bit-exact.

    A single instance is a single-threaded state machine; run one instance
    per worker.
    """

    state_space: tuple[VariableSpec, ...] = ()
    actions: tuple[ActionSchema, ...] = ()
    horizon: int = 1
    gamma: float = 0.99
    goal_reward: float = 1.0
    step_reward: float = 0.0

    def __init__(self):
        self.rng = np.random.default_rng(0)
        self._schema_by_label = {a.label: a for a in self.actions}
        self._state: tuple[float, ...] = ()
        self._t = 0
        self._done = True
        self._goal = False

    # -- contract ---------------------------------------------------------

    def reset(self, seed: int) -> tuple[float, ...]:
        """Start a new episode. Reseeds the internal RNG."""
        if seed < 0:
            raise ValueError("seed must be >= 0")
        self.rng = np.random.default_rng(seed)
        self._state = self._initial_state()
        self._t = 0
        self._done = False
        self._goal = False
        return self._state

    def step(self, action: GroundedAction) -> StepResult:
        if self._done:
            raise EpisodeFinished("episode is over; call reset()")
        schema = self._schema_by_label.get(action.label)
        if schema is None:
            raise OutOfDomainAction(f"unknown action label {action.label!r}")
        schema.validate_args(action.args)

        next_state, reward, done, goal = self._transition(action.label, action.args)
        self._t += 1
        if self._t >= self.horizon:
            done = True
        if goal:
            done = True
        self._state = next_state
        self._done = done
        self._goal = goal
        return StepResult(next_state, reward, done, goal)

    @property
    def state(self) -> tuple[float, ...]:
        return self._state

    @property
    def steps_taken(self) -> int:
        return self._t

    @property
    def done(self) -> bool:
        return self._done

    @property
    def goal_reached(self) -> bool:
        """Whether the most recent step of the current episode hit the goal."""
        return self._goal

    # -- to implement ------------------------------------------------------

    def _initial_state(self) -> tuple[float, ...]:
        raise NotImplementedError

    def _transition(
        self, label: str, args: tuple[float, ...]
    ) -> tuple[tuple[float, ...], float, bool, bool]:
        raise NotImplementedError
