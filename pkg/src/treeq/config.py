"""Experiment configuration and the shipped per-domain defaults.

`default_config(env, mode)` returns the hyperparameters used for each
benchmark and refinement mode; the corridor presets are desk-scale values
for the small oracle environment. Configs round-trip through JSON so runs
are reproducible from a single file."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import MalformedInput

ENV_NAMES = ("office", "pinball", "multicity", "soccer", "corridor")
MODES = ("flexible", "uniform")


@dataclass
class ExperimentConfig:
    env: str
    mode: str = "flexible"
    layout: str | None = None  # path; None uses the env's shipped layout
    n_episodes: int = 10000
    n_refine: int = 100
    horizon: int = 400
    gamma: float = 0.99
    alpha: float = 0.05
    lam: float = 0.1
    eps_min: float = 0.05
    eps_decay: float = 0.9989
    k_cap: int = 2
    k_cap_actions: int = 3
    max_clusters: int = 3
    variables_to_split: int = 1
    kernel: str = "linear"
    beta_decay: float = 0.02
    beta_initial: float = 1.0
    similarity_beta_decay: float | None = None  # None: share beta_decay
    eval_every: int = 100
    eval_episodes: int = 20
    goal_reward: float = 1.0
    step_reward: float = 0.0
    noise_sigma: float | None = None  # None: layout value
    seeds: tuple[int, ...] = (0,)
    # flexible-refinement statistics knobs
    candidate_Cs: tuple[float, ...] = (0.1, 1.0, 10.0, 100.0)
    cluster_start: float = 0.1
    cluster_step: float = 0.001
    cluster_linkage: str = "ward"
    cluster_features: str = "similarity"
    max_cluster_points: int = 256
    svm_seed: int = 0

    def __post_init__(self):
        if self.env not in ENV_NAMES:
            raise ValueError(f"unknown env {self.env!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.n_episodes < 1 or self.n_refine < 1 or self.horizon < 1:
            raise ValueError("n_episodes, n_refine, and horizon must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        self.seeds = tuple(int(s) for s in self.seeds)
        self.candidate_Cs = tuple(float(c) for c in self.candidate_Cs)

    def env_options(self) -> dict:
        opts = {
            "horizon": self.horizon,
            "gamma": self.gamma,
            "goal_reward": self.goal_reward,
            "step_reward": self.step_reward,
        }
        if self.env in ("office", "multicity") and self.noise_sigma is not None:
            opts["noise_sigma"] = self.noise_sigma
        return opts

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        d["candidate_Cs"] = list(self.candidate_Cs)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise MalformedInput(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            raise MalformedInput(f"bad config: {exc}") from exc

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise MalformedInput(f"cannot read config {path!r}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"config {path!r} is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


# Per-domain hyperparameters for the flexible refinement mode.
_FLEXIBLE = {
    "office": dict(
        eps_min=0.05, alpha=0.05, gamma=0.99, lam=0.1, horizon=400,
        eps_decay=0.9989, n_refine=100, k_cap=2, k_cap_actions=3,
        max_clusters=3, kernel="linear", beta_decay=0.02,
    ),
    "pinball": dict(
        eps_min=0.05, alpha=0.1, gamma=0.999, lam=0.1, horizon=600,
        eps_decay=0.9997, n_refine=100, k_cap=40, k_cap_actions=15,
        max_clusters=4, kernel="rbf", beta_decay=0.02,
    ),
    "multicity": dict(
        eps_min=0.05, alpha=0.05, gamma=0.99, lam=0.1, horizon=400,
        eps_decay=0.9989, n_refine=100, k_cap=10, k_cap_actions=10,
        max_clusters=8, kernel="linear", beta_decay=0.02,
    ),
    "soccer": dict(
        eps_min=0.05, alpha=0.05, gamma=0.99, lam=0.0, horizon=150,
        eps_decay=0.9989, n_refine=100, k_cap=25, k_cap_actions=25,
        max_clusters=20, kernel="linear", beta_decay=0.02,
    ),
}

# Uniform mode differs only in the selection caps and the split count.
_UNIFORM_OVERRIDES = {
    "office": dict(k_cap=5, k_cap_actions=5, variables_to_split=4),
    "pinball": dict(k_cap=40, k_cap_actions=15, variables_to_split=2),
    "multicity": dict(k_cap=10, k_cap_actions=10, variables_to_split=4),
    "soccer": dict(k_cap=10, k_cap_actions=10, variables_to_split=2),
}

# Desk-scale preset for the corridor oracle environment (not a benchmark).
_CORRIDOR = dict(
    eps_min=0.05, alpha=0.1, gamma=0.99, lam=0.1, horizon=60,
    eps_decay=0.9989, n_refine=50, k_cap=1, k_cap_actions=1,
    max_clusters=2, kernel="linear", beta_decay=0.02,
    n_episodes=2000, eval_every=100, eval_episodes=20,
)


def default_config(env: str, mode: str = "flexible", **overrides) -> ExperimentConfig:
    """Shipped defaults for one environment and refinement mode."""
    if env == "corridor":
        base = dict(_CORRIDOR)
        if mode == "uniform":
            base["variables_to_split"] = 1
    else:
        if env not in _FLEXIBLE:
            raise ValueError(f"unknown env {env!r}")
        base = dict(_FLEXIBLE[env])
        if mode == "uniform":
            base.update(_UNIFORM_OVERRIDES[env])
    base.update(overrides)
    return ExperimentConfig(env=env, mode=mode, **base)


def named_config(name: str, **overrides) -> ExperimentConfig:
    """Resolve a preset name of the form '<env>_<mode>'."""
    try:
        env, mode = name.rsplit("_", 1)
        return default_config(env, mode, **overrides)
    except ValueError as exc:
        raise MalformedInput(
            f"unknown config preset {name!r}; expected '<env>_<mode>'"
        ) from exc
