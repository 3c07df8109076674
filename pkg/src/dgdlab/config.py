"""Experiment configuration: one JSON document, validated up front.

Every referenced spec (ensemble, mixing, schedule) is parsed and built
eagerly so that a bad configuration fails before any computation starts,
and `canonical()` re-serializes to a normal form with defaults filled in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .costs import QuadraticEnsemble, ensemble_from_spec
from .errors import ConfigError, DgdLabError, MixingMatrixError
from .simulator import (
    DEFAULT_DIVERGENCE_THRESHOLD,
    DEFAULT_HORIZON,
    DEFAULT_RECORD_EVERY,
    StepsizeSchedule,
)
from .topology import MixingMatrix, mixing_from_spec

DEFAULT_ALPHA_MULTIPLES = [0.5, 0.95, 0.99, 1.01, 1.02]
DEFAULT_EPSILONS = [0.5 * k for k in range(1, 21)]
DEFAULT_THRESHOLD_SPEC = {
    "method": "bisection",
    "resolution": 1e-6,
    "grid_n": 10_000,
    "scan_cap": 1e3,
}


@dataclass
class ExperimentConfig:
    ensemble_spec: dict | None
    mixing_spec: dict | None
    schedule_spec: dict | None
    horizon: int = DEFAULT_HORIZON
    divergence_threshold: float = DEFAULT_DIVERGENCE_THRESHOLD
    record_every: int = DEFAULT_RECORD_EVERY
    agent_scale: bool = False
    track_lifted: bool = False
    x0: list[float] | None = None
    alpha_multiples: list[float] = field(default_factory=lambda: list(DEFAULT_ALPHA_MULTIPLES))
    sweep_base: str = "alpha_A"
    epsilons: list[float] = field(default_factory=lambda: list(DEFAULT_EPSILONS))
    family_L: float = 10.0
    family_mu: float = 1.0
    threshold_spec: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLD_SPEC))

    # built eagerly at parse time
    ensemble: QuadraticEnsemble | None = None
    mixing: MixingMatrix | None = None
    schedule: StepsizeSchedule | None = None

    def canonical(self) -> dict:
        out: dict = {}
        if self.ensemble_spec is not None:
            out["ensemble"] = self.ensemble_spec
        if self.mixing_spec is not None:
            out["mixing"] = self.mixing_spec
        if self.schedule_spec is not None:
            out["schedule"] = self.schedule.to_spec()
        out.update(
            {
                "horizon": self.horizon,
                "divergence_threshold": self.divergence_threshold,
                "record_every": self.record_every,
                "agent_scale": self.agent_scale,
                "track_lifted": self.track_lifted,
                "alpha_multiples": self.alpha_multiples,
                "sweep_base": self.sweep_base,
                "epsilons": self.epsilons,
                "L": self.family_L,
                "mu": self.family_mu,
                "threshold": self.threshold_spec,
            }
        )
        if self.x0 is not None:
            out["x0"] = self.x0
        return out

    def to_json(self) -> str:
        return json.dumps(self.canonical(), indent=2)


def parse_config(
    data: dict, seed_override: int | None = None, horizon_override: int | None = None
) -> ExperimentConfig:
    """Validate a config dictionary and build all referenced objects.

    Raises ConfigError with a human-readable diagnostic on any problem.
    """
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")

    known = {
        "ensemble", "mixing", "schedule", "horizon", "divergence_threshold",
        "record_every", "agent_scale", "track_lifted", "x0", "alpha_multiples",
        "sweep_base", "epsilons", "L", "mu", "threshold",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")

    ensemble_spec = data.get("ensemble")
    if ensemble_spec is not None and seed_override is not None:
        if ensemble_spec.get("type") == "random":
            ensemble_spec = dict(ensemble_spec, seed=int(seed_override))

    threshold_spec = dict(DEFAULT_THRESHOLD_SPEC)
    threshold_spec.update(data.get("threshold", {}))
    if threshold_spec["method"] not in ("bisection", "grid"):
        raise ConfigError(f"unknown threshold method {threshold_spec['method']!r}")
    if float(threshold_spec["resolution"]) <= 0:
        raise ConfigError("threshold resolution must be positive")

    cfg = ExperimentConfig(
        ensemble_spec=ensemble_spec,
        mixing_spec=data.get("mixing"),
        schedule_spec=data.get("schedule"),
        horizon=int(horizon_override if horizon_override is not None else data.get("horizon", DEFAULT_HORIZON)),
        divergence_threshold=float(data.get("divergence_threshold", DEFAULT_DIVERGENCE_THRESHOLD)),
        record_every=int(data.get("record_every", DEFAULT_RECORD_EVERY)),
        agent_scale=bool(data.get("agent_scale", False)),
        track_lifted=bool(data.get("track_lifted", False)),
        x0=list(map(float, data["x0"])) if data.get("x0") is not None else None,
        alpha_multiples=[float(v) for v in data.get("alpha_multiples", DEFAULT_ALPHA_MULTIPLES)],
        sweep_base=str(data.get("sweep_base", "alpha_A")),
        epsilons=[float(v) for v in data.get("epsilons", DEFAULT_EPSILONS)],
        family_L=float(data.get("L", 10.0)),
        family_mu=float(data.get("mu", 1.0)),
        threshold_spec=threshold_spec,
    )

    if cfg.horizon < 1:
        raise ConfigError("horizon must be at least 1")
    if cfg.record_every < 1:
        raise ConfigError("record_every must be at least 1")
    if cfg.divergence_threshold <= 0:
        raise ConfigError("divergence_threshold must be positive")
    if any(mult <= 0 for mult in cfg.alpha_multiples):
        raise ConfigError("alpha multiples must all be positive")
    if any(eps < 0 for eps in cfg.epsilons):
        raise ConfigError("epsilon values must be nonnegative")
    if cfg.sweep_base not in ("alpha_A", "main"):
        raise ConfigError(f"unknown sweep_base {cfg.sweep_base!r}")
    if not (cfg.family_L > cfg.family_mu > 0):
        raise ConfigError("sweep-epsilon family needs L > mu > 0")

    try:
        if cfg.ensemble_spec is not None:
            cfg.ensemble = ensemble_from_spec(cfg.ensemble_spec)
        if cfg.mixing_spec is not None:
            cfg.mixing = mixing_from_spec(cfg.mixing_spec)
        if cfg.schedule_spec is not None:
            cfg.schedule = StepsizeSchedule.from_spec(cfg.schedule_spec)
    except MixingMatrixError as exc:
        raise ConfigError(f"mixing spec invalid [{exc.code}]: {exc}") from exc
    except (ValueError, KeyError, TypeError, DgdLabError) as exc:
        raise ConfigError(f"configuration invalid: {exc}") from exc

    if cfg.ensemble is not None and cfg.mixing is not None:
        if cfg.ensemble.m != cfg.mixing.m:
            raise ConfigError(
                f"ensemble has {cfg.ensemble.m} agents but mixing matrix has {cfg.mixing.m}"
            )
    if cfg.x0 is not None and cfg.ensemble is not None:
        expected = cfg.ensemble.m * cfg.ensemble.n
        if len(cfg.x0) != expected:
            raise ConfigError(f"x0 has length {len(cfg.x0)}, expected {expected}")
        if not np.all(np.isfinite(cfg.x0)):
            raise ConfigError("x0 contains non-finite entries")
    return cfg


def load_config(
    path: str, seed_override: int | None = None, horizon_override: int | None = None
) -> ExperimentConfig:
    try:
        with open(path) as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return parse_config(data, seed_override=seed_override, horizon_override=horizon_override)
