"""Multi-city package delivery: collect a package in one city and deliver
it to a destination city's airport. Cities are connected only by air.

State (city, x, y, p): discrete city index, planar position within that
city, and the carrying flag. Movement works exactly as in the office task;
the extra fly action is parameterized by the destination city and only has
an effect when the agent stands within the station radius of the current
city's airport, where it teleports the agent to the target city's airport.
Flying anywhere else burns the step."""

from __future__ import annotations

from ..core import CONTINUOUS, DISCRETE, ActionSchema, Environment, VariableSpec
from .layout import boundary_walls, near, truncated_move
from .office import MOVE_LABELS


class MultiCityEnv(Environment):
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
            VariableSpec("city", 0, 3, DISCRETE),
            VariableSpec("x", xlo, xhi, CONTINUOUS),
            VariableSpec("y", ylo, yhi, CONTINUOUS),
            VariableSpec("p", 0, 2, DISCRETE),
        )
        dist = VariableSpec("d", 0.0, max_step, CONTINUOUS)
        dest = VariableSpec("c", 0, 3, DISCRETE)
        self.actions = tuple(ActionSchema(lbl, (dist,)) for lbl in MOVE_LABELS) + (
            ActionSchema("fly", (dest,)),
        )
        self.horizon = horizon
        self.gamma = gamma
        self.goal_reward = goal_reward
        self.step_reward = step_reward

        self.bounds = ((xlo, xhi), (ylo, yhi))
        border = boundary_walls(self.bounds)
        self.city_walls = [
            [tuple(map(float, w)) for w in city["walls"]] + border
            for city in layout["cities"]
        ]
        self.airports = [tuple(city["airport"]) for city in layout["cities"]]
        self.package_city = int(layout["package"]["city"])
        self.package_pos = tuple(layout["package"]["pos"])
        self.dest_city = int(layout["destination_city"])
        self.start_city = int(layout["start"]["city"])
        self.start_pos = tuple(layout["start"]["pos"])
        self.station_radius = float(layout["station_radius"])
        self.noise_sigma = float(
            layout["noise_sigma"] if noise_sigma is None else noise_sigma
        )
        super().__init__()

    def _initial_state(self):
        return (float(self.start_city), self.start_pos[0], self.start_pos[1], 0.0)

    def _transition(self, label, args):
        city, x, y, p = self._state
        ci = int(city)
        r = self.station_radius

        if label == "fly":
            if near(x, y, self.airports[ci], r):
                ci = int(args[0])
                x, y = self.airports[ci]
        else:
            d = args[0]
            noise = self.rng.uniform(-self.noise_sigma, self.noise_sigma)
            if label == "up":
                dx, dy = noise, d
            elif label == "down":
                dx, dy = noise, -d
            elif label == "left":
                dx, dy = -d, noise
            else:
                dx, dy = d, noise
            x, y = truncated_move(x, y, dx, dy, self.city_walls[ci], self.bounds)

        if p == 0.0 and ci == self.package_city and near(x, y, self.package_pos, r):
            p = 1.0
        goal = p == 1.0 and ci == self.dest_city and near(x, y, self.airports[ci], r)
        reward = self.goal_reward if goal else self.step_reward
        return (float(ci), x, y, p), reward, goal, goal


def make_multicity(layout: dict, **options) -> MultiCityEnv:
    return MultiCityEnv(layout, **options)
