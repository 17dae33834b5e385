"""Physics arena: steer a ball into a hole past polygonal obstacles.

State (x, y, vx, vy). Four thrust actions add a parameterized increment to
one signed velocity component; a parameterless no-op coasts. Each step the
velocity is updated and clamped, the ball advances velocity * dt, and drag
rescales the velocity. If the advance would cross an obstacle edge or the
outer boundary the ball stops at the impact point and the normal velocity
component reverses scaled by the restitution (one impact per step). With
drag and restitution at most 1, speed never grows across a no-op step."""

from __future__ import annotations

import math

from ..core import CONTINUOUS, ActionSchema, Environment, VariableSpec
from .layout import WALL_BACKOFF, boundary_walls, near


def _polygon_edges(poly) -> list[tuple[float, float, float, float]]:
    edges = []
    for i in range(len(poly)):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % len(poly)]
        edges.append((float(ax), float(ay), float(bx), float(by)))
    return edges


class PinballEnv(Environment):
    def __init__(
        self,
        layout: dict,
        horizon: int = 600,
        gamma: float = 0.999,
        goal_reward: float = 1.0,
        step_reward: float = 0.0,
    ):
        (xlo, xhi), (ylo, yhi) = layout["bounds"]
        vmax = float(layout["max_speed"])
        self.state_space = (
            VariableSpec("x", xlo, xhi, CONTINUOUS),
            VariableSpec("y", ylo, yhi, CONTINUOUS),
            VariableSpec("vx", -vmax, vmax, CONTINUOUS),
            VariableSpec("vy", -vmax, vmax, CONTINUOUS),
        )
        thrust = VariableSpec("a", 0.0, float(layout["max_thrust"]), CONTINUOUS)
        self.actions = (
            ActionSchema("thrust_x_up", (thrust,)),
            ActionSchema("thrust_x_down", (thrust,)),
            ActionSchema("thrust_y_up", (thrust,)),
            ActionSchema("thrust_y_down", (thrust,)),
            ActionSchema("noop", ()),
        )
        self.horizon = horizon
        self.gamma = gamma
        self.goal_reward = goal_reward
        self.step_reward = step_reward

        self.bounds = ((xlo, xhi), (ylo, yhi))
        self.vmax = vmax
        self.dt = float(layout["dt"])
        self.drag = float(layout["drag"])
        self.restitution = float(layout["restitution"])
        self.hole = tuple(layout["hole"])
        self.hole_radius = float(layout["hole_radius"])
        self.edges = boundary_walls(self.bounds)
        for poly in layout.get("obstacles", []):
            self.edges.extend(_polygon_edges(poly))
        self.start = tuple(layout["start"])
        super().__init__()

    def _initial_state(self):
        return (self.start[0], self.start[1], 0.0, 0.0)

    def _clamp_v(self, v: float) -> float:
        return min(max(v, -self.vmax), self.vmax - WALL_BACKOFF)

    def _transition(self, label, args):
        x, y, vx, vy = self._state
        if label == "thrust_x_up":
            vx += args[0]
        elif label == "thrust_x_down":
            vx -= args[0]
        elif label == "thrust_y_up":
            vy += args[0]
        elif label == "thrust_y_down":
            vy -= args[0]
        vx = self._clamp_v(vx)
        vy = self._clamp_v(vy)

        dx = vx * self.dt
        dy = vy * self.dt
        hit_t, hit_edge = None, None
        for edge in self.edges:
            ax, ay, bx, by = edge
            ex, ey = bx - ax, by - ay
            denom = dx * ey - dy * ex
            if denom == 0.0:
                continue
            qx, qy = ax - x, ay - y
            t = (qx * ey - qy * ex) / denom
            if t <= 0.0 or t > 1.0:
                continue
            u = (qx * dy - qy * dx) / denom
            if 0.0 <= u <= 1.0 and (hit_t is None or t < hit_t):
                hit_t, hit_edge = t, edge
        if hit_t is not None:
            norm = math.hypot(dx, dy)
            t = max(0.0, hit_t - (WALL_BACKOFF / norm if norm > 0.0 else 0.0))
            x += t * dx
            y += t * dy
            # reflect: normal component reverses scaled by restitution
            ax, ay, bx, by = hit_edge
            ex, ey = bx - ax, by - ay
            elen = math.hypot(ex, ey)
            nx, ny = -ey / elen, ex / elen
            vn = vx * nx + vy * ny
            vx -= (1.0 + self.restitution) * vn * nx
            vy -= (1.0 + self.restitution) * vn * ny
        else:
            x += dx
            y += dy

        vx = self._clamp_v(vx * self.drag)
        vy = self._clamp_v(vy * self.drag)
        (xlo, xhi), (ylo, yhi) = self.bounds
        x = min(max(x, xlo), xhi - WALL_BACKOFF)
        y = min(max(y, ylo), yhi - WALL_BACKOFF)

        goal = near(x, y, self.hole, self.hole_radius)
        reward = self.goal_reward if goal else self.step_reward
        return (x, y, vx, vy), reward, goal, goal


def make_pinball(layout: dict, **options) -> PinballEnv:
    return PinballEnv(layout, **options)
