"""Experiment configuration and its plain-text ``key = value`` file format."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from ..adapt import geometric_grid
from ..metric import MetricParams
from ..synth import SwissRollConfig, TendrilConfig

__all__ = ["ExperimentConfig", "load_config", "parse_config_text", "FAST_REPETITIONS"]

FAST_REPETITIONS = 50


@dataclass(frozen=True)
class ExperimentConfig:
    generator: str = "swiss_roll"
    n_total: int = 400
    n_grid: tuple[int, ...] = (5, 10, 20, 40, 80, 160, 320)
    alpha_grid: tuple[float, ...] = (0.0, 0.03, 0.1, 0.3, 1.0)
    repetitions: int = 300
    k_neighbors: int = 20
    quadrature_segments: int = 16
    density_kernel: str = "boxcar"
    # "cv" picks (h, sigma) per cell on a validation split; "fixed" uses h_fixed and sigma_grid[0]
    h_rule: str = "cv"
    h_fixed: float = 0.1
    # "diameter": h values multiply the largest graph distance of the fitted metric
    h_scale: str = "diameter"
    h_grid: tuple[float, ...] = field(default_factory=lambda: geometric_grid(0.01, 2.0, 8))
    # multiples of the Euclidean diameter of the drawn point cloud
    sigma_grid: tuple[float, ...] = (0.05, 0.1, 0.2)
    master_seed: int = 0
    output_dir: str = "results"
    workers: int = 1
    # swiss roll
    jitter_sd: float = 0.01
    noise_sd: float = 0.05
    height: float = 1.0
    # tendrils
    tendril_dim: int = 4
    epsilon: float = 0.25
    lipschitz: float = 1.0

    def __post_init__(self):
        if self.generator not in ("swiss_roll", "tendril"):
            raise ValueError(f"unknown generator {self.generator!r}")
        for name in ("n_grid", "alpha_grid", "h_grid", "sigma_grid"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if max(self.n_grid) > self.n_total or min(self.n_grid) < 1:
            raise ValueError("n_grid entries must lie in [1, n_total]")
        if self.h_rule not in ("cv", "fixed"):
            raise ValueError("h_rule must be 'cv' or 'fixed'")
        if self.h_scale not in ("diameter", "absolute"):
            raise ValueError("h_scale must be 'diameter' or 'absolute'")
        if self.h_rule == "cv" and min(self.n_grid) < 2:
            raise ValueError("h_rule=cv needs every n >= 2")
        MetricParams(0.0, self.k_neighbors, self.quadrature_segments)

    @property
    def metric_params(self) -> MetricParams:
        return MetricParams(0.0, self.k_neighbors, self.quadrature_segments)

    def swiss_roll_config(self, seed: int) -> SwissRollConfig:
        return SwissRollConfig(n_total=self.n_total, jitter_sd=self.jitter_sd,
                               noise_sd=self.noise_sd, height=self.height, seed=seed)

    def tendril_config(self, seed: int) -> TendrilConfig:
        return TendrilConfig(dim=self.tendril_dim, epsilon=self.epsilon,
                             lipschitz=self.lipschitz, seed=seed)

    def fast(self) -> "ExperimentConfig":
        return replace(self, repetitions=FAST_REPETITIONS)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def digest(self) -> str:
        """Hash of every field that influences results (not output_dir or workers)."""
        d = self.to_dict()
        d.pop("output_dir")
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_TUPLE_TYPES = {"n_grid": int, "alpha_grid": float, "h_grid": float, "sigma_grid": float}


def _coerce(name: str, raw: str, default: Any) -> Any:
    raw = raw.strip()
    if name in _TUPLE_TYPES:
        cast = _TUPLE_TYPES[name]
        return tuple(cast(v) for v in raw.replace(" ", "").split(",") if v)
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def parse_config_text(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, lists are comma-separated."""
    base = base or ExperimentConfig()
    known = {f.name: getattr(base, f.name) for f in fields(base)}
    updates: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        try:
            updates[key] = _coerce(key, value, known[key])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key}: {exc}") from None
    return replace(base, **updates)


def load_config(path) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))
