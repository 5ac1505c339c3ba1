"""Run configuration.

Every tunable lives in one of the block dataclasses below; ``RunConfig`` groups
them with the master seed and output directory. Configs are plain JSON and are
checked strictly: unknown keys are rejected so that a resolved config fully
describes a run.
"""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configuration documents."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class NeuronConfig:
    # Izhikevich regular-spiking defaults
    a: float = 0.02
    b: float = 0.2
    c: float = -65.0
    d: float = 8.0
    v_threshold: float = 30.0
    current_scale: float = 15.0
    w_max: float = 1.0
    w_init_lo: float = 0.1
    w_init_hi: float = 1.0


@dataclass(frozen=True)
class PlasticityConfig:
    tau_plus: float = 20.0
    tau_minus: float = 20.0
    sigma_plus: float = 10.0
    sigma_minus: float = 20.0
    a_min: float = 0.001
    a_max: float = 0.1
    w_cap: float = 5.0


@dataclass(frozen=True)
class CodecConfig:
    p_max: float = 0.1
    window: int = 20


@dataclass(frozen=True)
class MutationRates:
    add_connection: float = 0.10
    add_node: float = 0.03
    toggle_enable: float = 0.02
    flip_transmitter: float = 0.05
    switch_plasticity: float = 0.05
    perturb_amplitudes: float = 0.10
    perturb_sigma: float = 0.01


@dataclass(frozen=True)
class GenomeConfig:
    mutation: MutationRates = field(default_factory=MutationRates)
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 0.5
    compatibility_threshold: float = 3.0


@dataclass(frozen=True)
class EnvironmentConfig:
    variant: str = "binary1d"
    dataset_size: int = 40
    specs_per_cycle: int = 4
    balance_lo: float = 0.4
    balance_hi: float = 0.6
    max_rejections: int = 10_000


@dataclass(frozen=True)
class LifetimeConfig:
    initial_health: float = 100.0
    reward_decrement: float = 0.1
    penalty_decrement: float = 0.4
    size_decrement: float = 0.01
    sample_steps: int = 200
    n_trials: int = 3


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 100
    generations: int = 30
    elitism: int = 1
    survival_fraction: float = 0.3
    stagnation_limit: int = 15
    tournament_size: int = 2
    freeze_schedule: bool = False
    abort_on_total_stagnation: bool = False


@dataclass(frozen=True)
class RunConfig:
    neuron: NeuronConfig = field(default_factory=NeuronConfig)
    plasticity: PlasticityConfig = field(default_factory=PlasticityConfig)
    codec: CodecConfig = field(default_factory=CodecConfig)
    genome: GenomeConfig = field(default_factory=GenomeConfig)
    environment: EnvironmentConfig = field(default_factory=EnvironmentConfig)
    lifetime: LifetimeConfig = field(default_factory=LifetimeConfig)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    master_seed: int = 0
    output_dir: str = "runs/out"

    def replace(self, **changes: Any) -> "RunConfig":
        """Return a copy with top-level blocks or nested ``block__field`` values replaced."""
        top: dict[str, Any] = {}
        nested: dict[str, dict[str, Any]] = {}
        for key, value in changes.items():
            if "__" in key:
                block, name = key.split("__", 1)
                nested.setdefault(block, {})[name] = value
            else:
                top[key] = value
        for block, values in nested.items():
            top[block] = dataclasses.replace(top.get(block, getattr(self, block)), **values)
        return dataclasses.replace(self, **top)


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    if m is None:
        return None
    return text.count("\n", 0, m.start()) + 1


def _build(cls: type, data: Any, path: str, text: str | None) -> Any:
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'} must be an object", _line_of(text, path.rsplit(".", 1)[-1]))
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if key == "weight":
            raise ConfigError(f"{where}: genomes carry no weights", _line_of(text, key))
        if key not in known:
            raise ConfigError(f"unknown key {where!r}", _line_of(text, key))
        default = known[key].default_factory() if known[key].default_factory is not dataclasses.MISSING else known[key].default
        if dataclasses.is_dataclass(default):
            kwargs[key] = _build(type(default), value, where, text)
            continue
        kwargs[key] = _coerce(value, default, where, text, key)
    return cls(**kwargs)


def _coerce(value: Any, default: Any, where: str, text: str | None, key: str) -> Any:
    line = _line_of(text, key)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be a boolean", line)
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer", line)
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number", line)
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string", line)
        return value
    return value


def validate(cfg: RunConfig) -> RunConfig:
    """Check cross-field constraints; return ``cfg`` unchanged when valid."""
    ev, env, n = cfg.evolution, cfg.environment, cfg.neuron
    if ev.population_size < 2:
        raise ConfigError("evolution.population_size must be >= 2")
    if ev.generations < 0:
        raise ConfigError("evolution.generations must be >= 0")
    if not 0.0 < ev.survival_fraction <= 1.0:
        raise ConfigError("evolution.survival_fraction must lie in (0, 1]")
    if ev.elitism < 0 or ev.tournament_size < 1:
        raise ConfigError("evolution.elitism must be >= 0 and tournament_size >= 1")
    if env.variant not in ("binary1d", "linear2d"):
        raise ConfigError(f"environment.variant must be 'binary1d' or 'linear2d', got {env.variant!r}")
    if env.dataset_size < 2 or env.specs_per_cycle < 1:
        raise ConfigError("environment.dataset_size must be >= 2 and specs_per_cycle >= 1")
    if env.variant == "binary1d" and env.dataset_size % 2:
        raise ConfigError("environment.dataset_size must be even for binary1d (balanced classes)")
    if not 0.0 <= env.balance_lo <= env.balance_hi <= 1.0:
        raise ConfigError("environment balance bounds must satisfy 0 <= lo <= hi <= 1")
    if not 0.0 < cfg.codec.p_max <= 1.0 or cfg.codec.window < 1:
        raise ConfigError("codec.p_max must lie in (0, 1] and codec.window >= 1")
    if not 0.0 <= n.w_init_lo <= n.w_init_hi <= n.w_max:
        raise ConfigError("neuron weights must satisfy 0 <= w_init_lo <= w_init_hi <= w_max")
    pl = cfg.plasticity
    if pl.w_cap <= 0 or not 0 < pl.a_min <= pl.a_max:
        raise ConfigError("plasticity.w_cap must be > 0 and 0 < a_min <= a_max")
    if pl.sigma_minus <= pl.sigma_plus:
        raise ConfigError("plasticity.sigma_minus must exceed sigma_plus")
    lt = cfg.lifetime
    if lt.initial_health <= 0 or lt.sample_steps < 1 or lt.n_trials < 1:
        raise ConfigError("lifetime.initial_health > 0, sample_steps >= 1 and n_trials >= 1 required")
    if min(lt.reward_decrement, lt.penalty_decrement) <= 0 or lt.size_decrement < 0:
        raise ConfigError("lifetime decrements must be positive")
    return cfg


def from_dict(data: Any, text: str | None = None) -> RunConfig:
    return validate(_build(RunConfig, data, "", text))


def to_dict(cfg: RunConfig) -> dict[str, Any]:
    return dataclasses.asdict(cfg)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from exc
    return from_dict(data, text)


def dump_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_dict(cfg), indent=2, sort_keys=True) + "\n")
