"""Layout files: parsing, validation, and the 2-D geometry shared by the
navigation benchmarks.

A layout is a JSON object with `format` "treeq-layout", `version` 1, and an
`env` discriminator; the remaining schema is per environment. Wall segments
block motion: a move stops a hair short of the first crossed segment
(truncation, not bouncing)."""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

from ..errors import MalformedLayout

LAYOUT_FORMAT = "treeq-layout"
LAYOUT_VERSION = 1

# distance left between a truncated move and the wall it hit
WALL_BACKOFF = 1e-7


def segment_hit(
    x0: float, y0: float, dx: float, dy: float, walls
) -> float | None:
    """Earliest motion parameter t in (0, 1] at which the move from
    (x0, y0) by (dx, dy) crosses any wall segment, or None. Motion parallel
    to a segment never crosses it."""
    best = None
    for ax, ay, bx, by in walls:
        ex = bx - ax
        ey = by - ay
        denom = dx * ey - dy * ex
        if denom == 0.0:
            continue
        qx = ax - x0
        qy = ay - y0
        t = (qx * ey - qy * ex) / denom
        if t <= 0.0 or t > 1.0:
            continue
        u = (qx * dy - qy * dx) / denom
        if 0.0 <= u <= 1.0 and (best is None or t < best):
            best = t
    return best


def truncated_move(
    x0: float, y0: float, dx: float, dy: float, walls, bounds
) -> tuple[float, float]:
    """End point of a wall-truncated move, kept strictly inside the
    half-open bounds box ((xlo, xhi), (ylo, yhi))."""
    t = segment_hit(x0, y0, dx, dy, walls)
    if t is not None:
        norm = math.hypot(dx, dy)
        t = max(0.0, t - (WALL_BACKOFF / norm if norm > 0.0 else 0.0))
        x1 = x0 + t * dx
        y1 = y0 + t * dy
    else:
        x1 = x0 + dx
        y1 = y0 + dy
    (xlo, xhi), (ylo, yhi) = bounds
    x1 = min(max(x1, xlo), xhi - WALL_BACKOFF)
    y1 = min(max(y1, ylo), yhi - WALL_BACKOFF)
    return x1, y1


def boundary_walls(bounds) -> list[tuple[float, float, float, float]]:
    (xlo, xhi), (ylo, yhi) = bounds
    return [
        (xlo, ylo, xhi, ylo),
        (xhi, ylo, xhi, yhi),
        (xhi, yhi, xlo, yhi),
        (xlo, yhi, xlo, ylo),
    ]


def near(x: float, y: float, point, radius: float) -> bool:
    dx = x - point[0]
    dy = y - point[1]
    return dx * dx + dy * dy <= radius * radius


# -- loading / validation ----------------------------------------------------


def builtin_layout_path(name: str) -> Path:
    """Path of a layout shipped with the package (name without .json)."""
    return Path(resources.files("treeq.envs").joinpath(f"layouts/{name}.json"))


def load_layout(source) -> dict:
    """Parse a layout from a path, a JSON string, or an already-parsed dict,
    and validate it. Raises MalformedLayout on any problem."""
    if isinstance(source, dict):
        doc = source
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise MalformedLayout(f"cannot read layout {source!r}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedLayout(f"layout {source!r} is not valid JSON: {exc}") from exc
    problems = validate_layout(doc)
    if problems:
        raise MalformedLayout("; ".join(problems))
    return doc


def _in_bounds(point, bounds) -> bool:
    (xlo, xhi), (ylo, yhi) = bounds
    return xlo <= point[0] < xhi and ylo <= point[1] < yhi


def _check_walls(walls, bounds, problems, where) -> None:
    for i, w in enumerate(walls):
        if len(w) != 4 or not all(isinstance(v, (int, float)) for v in w):
            problems.append(f"{where}: wall {i} must be [ax, ay, bx, by]")
            continue
        ax, ay, bx, by = w
        if (ax, ay) == (bx, by):
            problems.append(f"{where}: wall {i} is degenerate")
        for px, py in ((ax, ay), (bx, by)):
            (xlo, xhi), (ylo, yhi) = bounds
            if not (xlo <= px <= xhi and ylo <= py <= yhi):
                problems.append(f"{where}: wall {i} endpoint outside bounds")


def validate_layout(doc: dict) -> list[str]:
    """All schema problems found in the layout document; empty when valid."""
    problems: list[str] = []
    if not isinstance(doc, dict):
        return ["layout must be a JSON object"]
    if doc.get("format") != LAYOUT_FORMAT:
        problems.append(f"format must be {LAYOUT_FORMAT!r}")
    if doc.get("version") != LAYOUT_VERSION:
        problems.append(f"version must be {LAYOUT_VERSION}")
    env = doc.get("env")
    if env not in ("office", "multicity", "pinball", "soccer"):
        problems.append(f"unknown env {env!r}")
        return problems

    bounds = doc.get("bounds")
    if (
        not isinstance(bounds, list)
        or len(bounds) != 2
        or any(len(b) != 2 or not b[0] < b[1] for b in bounds)
    ):
        problems.append("bounds must be [[xlo, xhi], [ylo, yhi]] with lo < hi")
        return problems

    if env == "office":
        _check_walls(doc.get("walls", []), bounds, problems, "walls")
        stations = doc.get("stations", {})
        for key in ("coffee", "mail", "office"):
            if key not in stations:
                problems.append(f"stations: missing {key!r}")
            elif not _in_bounds(stations[key], bounds):
                problems.append(f"stations: {key} outside bounds")
        if "start" not in doc or not _in_bounds(doc["start"], bounds):
            problems.append("start missing or outside bounds")
        if not doc.get("station_radius", 0) > 0:
            problems.append("station_radius must be positive")
        for key, r in doc.get("station_radii", {}).items():
            if key not in ("coffee", "mail", "office") or not r > 0:
                problems.append(f"station_radii: bad entry {key!r}")
        if doc.get("noise_sigma", 0) < 0:
            problems.append("noise_sigma must be nonnegative")

    elif env == "multicity":
        cities = doc.get("cities")
        if not isinstance(cities, list) or len(cities) != 3:
            problems.append("cities must list exactly 3 cities")
        else:
            for ci, city in enumerate(cities):
                _check_walls(city.get("walls", []), bounds, problems, f"city {ci}")
                if "airport" not in city or not _in_bounds(city["airport"], bounds):
                    problems.append(f"city {ci}: airport missing or outside bounds")
        pkg = doc.get("package", {})
        if pkg.get("city") not in (0, 1, 2) or not _in_bounds(pkg.get("pos", (-1, -1)), bounds):
            problems.append("package must name a city 0-2 and an in-bounds pos")
        if doc.get("destination_city") not in (0, 1, 2):
            problems.append("destination_city must be 0-2")
        start = doc.get("start", {})
        if start.get("city") not in (0, 1, 2) or not _in_bounds(start.get("pos", (-1, -1)), bounds):
            problems.append("start must name a city 0-2 and an in-bounds pos")
        if not doc.get("station_radius", 0) > 0:
            problems.append("station_radius must be positive")

    elif env == "pinball":
        for poly_i, poly in enumerate(doc.get("obstacles", [])):
            if not isinstance(poly, list) or len(poly) < 3:
                problems.append(f"obstacle {poly_i} needs >= 3 vertices")
                continue
            for v in poly:
                if not _in_bounds(v, bounds):
                    problems.append(f"obstacle {poly_i} vertex outside bounds")
        if "start" not in doc or not _in_bounds(doc["start"], bounds):
            problems.append("start missing or outside bounds")
        if "hole" not in doc or not _in_bounds(doc["hole"], bounds):
            problems.append("hole missing or outside bounds")
        if not doc.get("hole_radius", 0) > 0:
            problems.append("hole_radius must be positive")
        if not 0 < doc.get("drag", 0) <= 1:
            problems.append("drag must be in (0, 1]")
        if not 0 < doc.get("restitution", 0) <= 1:
            problems.append("restitution must be in (0, 1]")
        for key in ("dt", "max_thrust", "max_speed"):
            if not doc.get(key, 0) > 0:
                problems.append(f"{key} must be positive")

    elif env == "soccer":
        (xlo, xhi), (ylo, yhi) = bounds
        if not ylo <= doc.get("goal_lo", -1) < doc.get("goal_hi", -1) <= yhi:
            problems.append("goal mouth must satisfy ylo <= goal_lo < goal_hi <= yhi")
        for key in (
            "keeper_speed",
            "keeper_capture_radius",
            "keeper_depth",
            "ball_speed",
            "shot_speed",
            "kick_range",
            "agent_speed",
        ):
            if not doc.get(key, 0) > 0:
                problems.append(f"{key} must be positive")
        if doc.get("kick_noise", 0) < 0:
            problems.append("kick_noise must be nonnegative")
        for key in ("agent_start", "ball_start"):
            if key not in doc or not _in_bounds(doc[key], bounds):
                problems.append(f"{key} missing or outside bounds")
        if not ylo <= doc.get("keeper_start_y", -1) < yhi:
            problems.append("keeper_start_y outside bounds")

    return problems
