"""Tour of the four benchmark environments: state spaces, parameterized
action sets, and a few hand-chosen grounded steps in each.

Run:  python3 demos/05_benchmark_environments.py
"""

from treeq import GroundedAction
from treeq.envs import make_env


def describe(env, name):
    print(f"\n== {name} ==")
    vars_ = ", ".join(f"{v.name}[{v.lo:g},{v.hi:g})" for v in env.state_space)
    print(f"state: ({vars_})   horizon={env.horizon}  gamma={env.gamma}")
    for a in env.actions:
        params = ", ".join(f"{p.name}[{p.lo:g},{p.hi:g})" for p in a.params)
        print(f"  action {a.label}({params})")


office = make_env("office", noise_sigma=0.0)
describe(office, "office delivery")
office.reset(0)
for lbl, d in [("right", 0.45)] * 3:
    res = office.step(GroundedAction(lbl, (d,)))
print(f"after three right moves: {tuple(round(v, 2) for v in res.next_state)} "
      f"(coffee flag: {res.next_state[2]:g})")

multi = make_env("multicity", noise_sigma=0.0)
describe(multi, "multi-city transport")
multi.reset(0)
res = multi.step(GroundedAction("fly", (2.0,)))
print(f"fly away from an airport is a no-op: state {tuple(round(v,2) for v in res.next_state)}")

pin = make_env("pinball")
describe(pin, "pinball")
pin.reset(0)
pin.step(GroundedAction("thrust_x_up", (0.15,)))
res = pin.step(GroundedAction("noop", ()))
print(f"coasting after one thrust: {tuple(round(v, 3) for v in res.next_state)}")

soc = make_env("soccer")
describe(soc, "soccer goal")
soc.reset(0)
for _ in range(12):
    res = soc.step(GroundedAction("kick_to", (0.97, 0.55)))
for _ in range(4):
    res = soc.step(GroundedAction("shoot_left", (0.37,)))
    if soc.done:
        break
print(f"dribble then corner shot: goal={res.goal_reached}")
