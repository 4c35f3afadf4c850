"""Experiment configuration: one YAML file per experiment.

Nested blocks mirror the pipeline: grid geometry at the top level, then
``potential``, ``boundary``, ``solver`` and ``analysis`` blocks. Configs
round-trip losslessly through to_dict/from_dict, and every emitted report
embeds the sha256 of the canonical serialization.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

import yaml

from .field import Grid
from .potentials import Potential, from_config as potential_from_config


class ConfigError(ValueError):
    """Invalid experiment configuration; the message carries the key path."""


_SOLVER_DEFAULTS = {"tol": 1e-5, "max_iter": 50_000}
_ANALYSIS_DEFAULTS = {
    "radii": [],
    "eps": 0.1,
    "alpha": 1.0,
    "samples": 32,
    "sphere_points": 512,
    "tau": None,
    "c_m": 1.0,
    "delta_q_scale": 1e-3,
    "r": None,              # max-principle excursion radius
}


@dataclass
class ExperimentConfig:
    n: int
    m: int
    h: float
    r_max: float
    potential: dict
    boundary: dict
    solver: dict = field(default_factory=dict)
    analysis: dict = field(default_factory=dict)
    out: str = "out"
    seed: int = 0

    def __post_init__(self):
        self.solver = {**_SOLVER_DEFAULTS, **(self.solver or {})}
        self.analysis = {**_ANALYSIS_DEFAULTS, **(self.analysis or {})}
        self.validate()

    def validate(self) -> None:
        def need(cond, path, msg):
            if not cond:
                raise ConfigError(f"{path}: {msg}")

        need(self.n in (2, 3), "n", "must be 2 or 3")
        need(self.m >= 1, "m", "must be >= 1")
        need(self.h > 0, "h", "must be > 0")
        need(self.r_max > 0, "r_max", "must be > 0")
        need(self.r_max >= 4 * self.h, "r_max", "must be at least 4h")
        need(isinstance(self.potential, dict) and "family" in self.potential,
             "potential.family", "is required")
        need(isinstance(self.boundary, dict) and "tag" in self.boundary,
             "boundary.tag", "is required")
        need(self.solver["tol"] > 0, "solver.tol", "must be > 0")
        need(int(self.solver["max_iter"]) >= 1, "solver.max_iter", "must be >= 1")
        for r in self.analysis["radii"]:
            need(0 < r <= self.r_max, "analysis.radii",
                 f"radius {r} outside (0, r_max]")
        need(self.analysis["eps"] > 0, "analysis.eps", "must be > 0")
        need(0 < self.analysis["alpha"] <= 1, "analysis.alpha",
             "must be in (0, 1]")

    # -- construction helpers ------------------------------------------------

    def make_grid(self) -> Grid:
        return Grid(self.n, self.h, self.r_max)

    def make_potential(self) -> Potential:
        pot = potential_from_config(self.potential)
        if pot.m != self.m:
            raise ConfigError(f"potential.zero: dimension {pot.m} != m={self.m}")
        return pot

    def delta_q(self) -> float:
        grid = self.make_grid()
        return 1e-8 + self.analysis["delta_q_scale"] * self.h ** 2 * grid.ball_volume()

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("top level: expected a mapping")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"{sorted(unknown)[0]}: unknown key")
        missing = [k for k in ("n", "m", "h", "r_max", "potential", "boundary")
                   if k not in d]
        if missing:
            raise ConfigError(f"{missing[0]}: missing required key")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_yaml(cls, path: str) -> "ExperimentConfig":
        with open(path) as f:
            try:
                raw = yaml.safe_load(f)
            except yaml.YAMLError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(raw)

    def to_yaml(self, path: str) -> None:
        with open(path, "w") as f:
            yaml.safe_dump(self.to_dict(), f, sort_keys=True)

    def sha256(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()
