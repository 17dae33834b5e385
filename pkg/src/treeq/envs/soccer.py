"""Shoot a ball past a keeper into the goal mouth on the right wall.

State (agent_x, agent_y, ball_x, ball_y, keeper_y). Three actions:
kick_to(x, y) nudges the ball one increment toward a field point,
shoot_left(y) / shoot_right(y) drive it harder toward a point on the lower
or upper half of the goal mouth. Ball actions only act while the agent is
within kick range; otherwise the step moves the agent toward the ball. The
keeper tracks the ball's projected goal-line crossing at a fixed speed.
Episodes end when the ball enters the goal (reward 1), the keeper captures
it, or it leaves the play area."""

from __future__ import annotations

import math

from ..core import CONTINUOUS, ActionSchema, Environment, VariableSpec
from .layout import WALL_BACKOFF, near


class SoccerEnv(Environment):
    def __init__(
        self,
        layout: dict,
        horizon: int = 150,
        gamma: float = 0.99,
        goal_reward: float = 1.0,
        step_reward: float = 0.0,
    ):
        (xlo, xhi), (ylo, yhi) = layout["bounds"]
        self.state_space = (
            VariableSpec("agent_x", xlo, xhi, CONTINUOUS),
            VariableSpec("agent_y", ylo, yhi, CONTINUOUS),
            VariableSpec("ball_x", xlo, xhi, CONTINUOUS),
            VariableSpec("ball_y", ylo, yhi, CONTINUOUS),
            VariableSpec("keeper_y", ylo, yhi, CONTINUOUS),
        )
        glo = float(layout["goal_lo"])
        ghi = float(layout["goal_hi"])
        gmid = 0.5 * (glo + ghi)
        self.actions = (
            ActionSchema(
                "kick_to",
                (
                    VariableSpec("x", xlo, xhi, CONTINUOUS),
                    VariableSpec("y", ylo, yhi, CONTINUOUS),
                ),
            ),
            ActionSchema("shoot_left", (VariableSpec("y", glo, gmid, CONTINUOUS),)),
            ActionSchema("shoot_right", (VariableSpec("y", gmid, ghi, CONTINUOUS),)),
        )
        self.horizon = horizon
        self.gamma = gamma
        self.goal_reward = goal_reward
        self.step_reward = step_reward

        self.bounds = ((xlo, xhi), (ylo, yhi))
        self.goal_lo = glo
        self.goal_hi = ghi
        self.goal_x = xhi
        self.keeper_speed = float(layout["keeper_speed"])
        self.capture_radius = float(layout["keeper_capture_radius"])
        self.keeper_depth = float(layout["keeper_depth"])
        self.ball_speed = float(layout["ball_speed"])
        self.shot_speed = float(layout["shot_speed"])
        self.kick_range = float(layout["kick_range"])
        self.agent_speed = float(layout["agent_speed"])
        self.kick_noise = float(layout["kick_noise"])
        self.agent_start = tuple(layout["agent_start"])
        self.ball_start = tuple(layout["ball_start"])
        self.keeper_start_y = float(layout["keeper_start_y"])
        super().__init__()

    def _initial_state(self):
        return (
            self.agent_start[0],
            self.agent_start[1],
            self.ball_start[0],
            self.ball_start[1],
            self.keeper_start_y,
        )

    def _transition(self, label, args):
        ax, ay, bx, by, ky = self._state
        (xlo, xhi), (ylo, yhi) = self.bounds
        # jitter perpendicular to the ball's travel, drawn every step
        noise = self.rng.uniform(-self.kick_noise, self.kick_noise)

        # shots are ballistic once chosen; close-control kicks need the
        # agent within reach. The ball overshoots its aim point, so it can
        # leave the play area.
        dbx = dby = 0.0
        if label == "kick_to":
            in_reach = near(ax, ay, (bx, by), self.kick_range)
            tx, ty = args
            speed = self.ball_speed if in_reach else 0.0
        else:
            tx, ty = self.goal_x, args[0]
            speed = self.shot_speed
        if speed > 0.0:
            vx, vy = tx - bx, ty - by
            dist = math.hypot(vx, vy)
            if dist > 0.0:
                ux, uy = vx / dist, vy / dist
                dbx = speed * ux - noise * uy
                dby = speed * uy + noise * ux

        # the agent trails the ball
        vx, vy = bx - ax, by - ay
        dist = math.hypot(vx, vy)
        if dist > 0.0:
            step = min(self.agent_speed, dist)
            ax += step * vx / dist
            ay += step * vy / dist

        new_bx = bx + dbx
        new_by = by + dby

        # keeper chases the ball's projected crossing point on the goal line
        if dbx > 0.0:
            y_proj = by + (self.goal_x - bx) * (dby / dbx)
        else:
            y_proj = new_by
        y_proj = min(max(y_proj, self.goal_lo), self.goal_hi)
        ky += min(max(y_proj - ky, -self.keeper_speed), self.keeper_speed)
        ky = min(max(ky, ylo), yhi - WALL_BACKOFF)

        done = False
        goal = False
        reward = self.step_reward
        keeper_pos = (self.goal_x - self.keeper_depth, ky)
        if near(new_bx, new_by, keeper_pos, self.capture_radius):
            done = True  # captured
        elif new_bx >= self.goal_x:
            # crossing point on the goal line
            t = (self.goal_x - bx) / dbx if dbx > 0.0 else 1.0
            y_cross = by + t * dby
            done = True
            if self.goal_lo <= y_cross < self.goal_hi:
                goal = True
                reward = self.goal_reward
        elif not (xlo <= new_bx < xhi and ylo <= new_by < yhi):
            done = True  # out of play

        bx = min(max(new_bx, xlo), xhi - WALL_BACKOFF)
        by = min(max(new_by, ylo), yhi - WALL_BACKOFF)
        return (ax, ay, bx, by, ky), reward, done, goal


def make_soccer(layout: dict, **options) -> SoccerEnv:
    return SoccerEnv(layout, **options)
