"""Continuous office delivery task: pick up coffee and mail, bring both to
the office.

State (x, y, c, m): planar position plus carrying flags. Four movement
actions, one per cardinal direction, each parameterized by the distance
d in [0, 0.5). A move displaces the agent d along the action axis plus a
uniform orthogonal jitter; motion stops at the first wall it would cross.
Items are picked up automatically when the agent comes within the station
radius. Reward is zero except on the step that reaches the office carrying
both items."""

from __future__ import annotations

from ..core import CONTINUOUS, DISCRETE, ActionSchema, Environment, VariableSpec
from .layout import boundary_walls, near, truncated_move

MOVE_LABELS = ("up", "down", "left", "right")


class OfficeEnv(Environment):
    def __init__(
        self,
        layout: dict,
        horizon: int = 400,
        gamma: float = 0.99,
        goal_reward: float = 1.0,
        step_reward: float = 0.0,
        noise_sigma: float | None = None,
        max_step: float = 0.5,
    ):
        (xlo, xhi), (ylo, yhi) = layout["bounds"]
        self.state_space = (
            VariableSpec("x", xlo, xhi, CONTINUOUS),
            VariableSpec("y", ylo, yhi, CONTINUOUS),
            VariableSpec("c", 0, 2, DISCRETE),
            VariableSpec("m", 0, 2, DISCRETE),
        )
        dist = VariableSpec("d", 0.0, max_step, CONTINUOUS)
        self.actions = tuple(ActionSchema(lbl, (dist,)) for lbl in MOVE_LABELS)
        self.horizon = horizon
        self.gamma = gamma
        self.goal_reward = goal_reward
        self.step_reward = step_reward

        self.bounds = ((xlo, xhi), (ylo, yhi))
        self.walls = [tuple(map(float, w)) for w in layout["walls"]]
        self.walls += boundary_walls(self.bounds)
        self.coffee = tuple(layout["stations"]["coffee"])
        self.mail = tuple(layout["stations"]["mail"])
        self.office = tuple(layout["stations"]["office"])
        radius = float(layout["station_radius"])
        overrides = layout.get("station_radii", {})
        self.coffee_radius = float(overrides.get("coffee", radius))
        self.mail_radius = float(overrides.get("mail", radius))
        self.office_radius = float(overrides.get("office", radius))
        self.noise_sigma = float(
            layout["noise_sigma"] if noise_sigma is None else noise_sigma
        )
        self.start = tuple(layout["start"])
        super().__init__()

    def _initial_state(self):
        return (self.start[0], self.start[1], 0.0, 0.0)

    def _transition(self, label, args):
        x, y, c, m = self._state
        d = args[0]
        # jitter is drawn every step so trajectories are reproducible from
        # the action sequence alone
        noise = self.rng.uniform(-self.noise_sigma, self.noise_sigma)
        if label == "up":
            dx, dy = noise, d
        elif label == "down":
            dx, dy = noise, -d
        elif label == "left":
            dx, dy = -d, noise
        else:
            dx, dy = d, noise
        x, y = truncated_move(x, y, dx, dy, self.walls, self.bounds)

        if c == 0.0 and near(x, y, self.coffee, self.coffee_radius):
            c = 1.0
        if m == 0.0 and near(x, y, self.mail, self.mail_radius):
            m = 1.0
        goal = c == 1.0 and m == 1.0 and near(x, y, self.office, self.office_radius)
        reward = self.goal_reward if goal else self.step_reward
        return (x, y, c, m), reward, goal, goal


def make_office(layout: dict, **options) -> OfficeEnv:
    return OfficeEnv(layout, **options)
