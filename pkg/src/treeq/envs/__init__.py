"""Benchmark environments and the factory used by the experiment harness."""

from __future__ import annotations

from ..errors import MalformedLayout
from .corridor import CorridorEnv, make_corridor
from .layout import builtin_layout_path, load_layout, validate_layout
from .multicity import MultiCityEnv, make_multicity
from .office import OfficeEnv, make_office
from .pinball import PinballEnv, make_pinball
from .soccer import SoccerEnv, make_soccer

DEFAULT_LAYOUTS = {
    "office": "office_default",
    "multicity": "multicity_default",
    "pinball": "pinball_default",
    "soccer": "soccer_default",
}

_FACTORIES = {
    "office": make_office,
    "multicity": make_multicity,
    "pinball": make_pinball,
    "soccer": make_soccer,
}


def make_env(name: str, layout_path=None, **options):
    """Build an environment by name. Navigation/physics environments load
    `layout_path` (or their shipped default layout); the corridor takes no
    layout. Extra options (horizon, gamma, goal_reward, ...) pass through to
    the environment constructor."""
    if name == "corridor":
        if layout_path is not None:
            raise MalformedLayout("the corridor environment takes no layout")
        return make_corridor(**options)
    if name not in _FACTORIES:
        raise ValueError(f"unknown environment {name!r}")
    if layout_path is None:
        layout_path = builtin_layout_path(DEFAULT_LAYOUTS[name])
    layout = load_layout(layout_path)
    if layout.get("env") != name:
        raise MalformedLayout(
            f"layout is for env {layout.get('env')!r}, expected {name!r}"
        )
    return _FACTORIES[name](layout, **options)


__all__ = [
    "CorridorEnv",
    "MultiCityEnv",
    "OfficeEnv",
    "PinballEnv",
    "SoccerEnv",
    "DEFAULT_LAYOUTS",
    "builtin_layout_path",
    "load_layout",
    "make_corridor",
    "make_env",
    "make_multicity",
    "make_office",
    "make_pinball",
    "make_soccer",
    "validate_layout",
]
