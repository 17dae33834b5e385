"""Minimal 1-D test environment with a known optimal policy.

The agent starts at x = 0 and moves right by the chosen distance
d in [0, 0.1); the episode ends with reward 1 once x >= 0.9. Fully
deterministic, so learning behavior can be checked against closed-form
expectations."""

from __future__ import annotations

from ..core import CONTINUOUS, ActionSchema, Environment, VariableSpec
from .layout import WALL_BACKOFF


class CorridorEnv(Environment):
    def __init__(
        self,
        horizon: int = 100,
        gamma: float = 0.99,
        goal_reward: float = 1.0,
        step_reward: float = 0.0,
        goal_pos: float = 0.9,
        max_step: float = 0.1,
    ):
        self.state_space = (VariableSpec("x", 0.0, 1.0, CONTINUOUS),)
        self.actions = (
            ActionSchema("move", (VariableSpec("d", 0.0, max_step, CONTINUOUS),)),
        )
        self.horizon = horizon
        self.gamma = gamma
        self.goal_reward = goal_reward
        self.step_reward = step_reward
        self.goal_pos = goal_pos
        super().__init__()

    def _initial_state(self):
        return (0.0,)

    def _transition(self, label, args):
        x = min(self._state[0] + args[0], 1.0 - WALL_BACKOFF)
        goal = x >= self.goal_pos
        reward = self.goal_reward if goal else self.step_reward
        return (x,), reward, goal, goal


def make_corridor(**options) -> CorridorEnv:
    return CorridorEnv(**options)
