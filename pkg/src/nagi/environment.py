"""Mutable environments: labelled sample streams whose labelling flips abruptly.

Two generators ship. ``binary1d`` has one black/white sensor and alternates an
environment with its colour-flipped twin. ``linear2d`` draws random half-plane
boundaries over two grey-level sensors, each followed by its flip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from nagi.codec import AVOID, EAT
from nagi.config import EnvironmentConfig
from nagi.seeding import stream


class ScheduleError(RuntimeError):
    """Environment generation failed (misconfigured balance bounds)."""


@dataclass(frozen=True)
class Sample:
    sensors: tuple[float, ...]
    label: int


@dataclass(frozen=True)
class EnvironmentSpec:
    variant: str
    flipped: bool
    normal: tuple[float, float] | None = None
    offset: float = 0.0

    @property
    def n_sensors(self) -> int:
        return 1 if self.variant == "binary1d" else 2

    def flip(self) -> "EnvironmentSpec":
        return EnvironmentSpec(self.variant, not self.flipped, self.normal, self.offset)


def label(spec: EnvironmentSpec, sensors: Sequence[float]) -> int:
    """Correct action for ``sensors`` under ``spec``."""
    if len(sensors) != spec.n_sensors:
        raise ValueError(f"{spec.variant} expects {spec.n_sensors} sensors, got {len(sensors)}")
    if spec.variant == "binary1d":
        eat = sensors[0] >= 0.5
    else:
        nx, ny = spec.normal
        eat = nx * sensors[0] + ny * sensors[1] + spec.offset >= 0.0
    if spec.flipped:
        eat = not eat
    return EAT if eat else AVOID


@dataclass(frozen=True)
class GenerationSchedule:
    generation_seed: int
    specs: tuple[EnvironmentSpec, ...]
    datasets: tuple[tuple[Sample, ...], ...]

    @property
    def n_sensors(self) -> int:
        return self.specs[0].n_sensors

    def order(self, cycle: int, spec_index: int) -> tuple[int, ...]:
        """Presentation order of a dataset; cycle 0 uses the stored shuffle."""
        n = len(self.datasets[spec_index])
        if cycle == 0:
            return tuple(range(n))
        perm = stream(self.generation_seed, 7, cycle, spec_index).permutation(n)
        return tuple(int(i) for i in perm)


@dataclass(frozen=True)
class Cursor:
    cycle: int = 0
    spec_index: int = 0
    position: int = 0


def _eat_fraction(spec: EnvironmentSpec, points: np.ndarray) -> float:
    return sum(label(spec, p) == EAT for p in points.tolist()) / len(points)


def _linear_pair(rng: np.random.Generator, cfg: EnvironmentConfig) -> tuple[EnvironmentSpec, np.ndarray]:
    for _ in range(cfg.max_rejections):
        points = rng.random((cfg.dataset_size, 2))
        angle = rng.uniform(0.0, 2.0 * math.pi)
        normal = (math.cos(angle), math.sin(angle))
        anchor = rng.random(2)
        offset = -(normal[0] * anchor[0] + normal[1] * anchor[1])
        spec = EnvironmentSpec("linear2d", False, normal, float(offset))
        if cfg.balance_lo <= _eat_fraction(spec, points) <= cfg.balance_hi:
            return spec, points
    raise ScheduleError(f"no balanced boundary found in {cfg.max_rejections} tries; check balance bounds")


def generate_schedule(generation_seed: int, cfg: EnvironmentConfig | None = None) -> GenerationSchedule:
    """All environments of one generation, fully determined by ``generation_seed``."""
    cfg = cfg or EnvironmentConfig()
    rng = stream(generation_seed, 0)
    specs: list[EnvironmentSpec] = []
    datasets: list[tuple[Sample, ...]] = []
    if cfg.variant == "binary1d":
        half = cfg.dataset_size // 2
        values = [0.0] * half + [1.0] * (cfg.dataset_size - half)
        for i in range(cfg.specs_per_cycle):
            spec = EnvironmentSpec("binary1d", flipped=bool(i % 2))
            order = rng.permutation(len(values))
            specs.append(spec)
            datasets.append(tuple(Sample((values[j],), label(spec, (values[j],))) for j in order))
    elif cfg.variant == "linear2d":
        points = None
        for i in range(cfg.specs_per_cycle):
            if i % 2 == 0:
                spec, points = _linear_pair(rng, cfg)
            else:
                spec = specs[-1].flip()
            order = rng.permutation(len(points))
            rows = points[order].tolist()
            specs.append(spec)
            datasets.append(tuple(Sample(tuple(p), label(spec, p)) for p in rows))
    else:
        raise ValueError(f"unknown environment variant {cfg.variant!r}")
    return GenerationSchedule(generation_seed, tuple(specs), tuple(datasets))


def next_sample(schedule: GenerationSchedule, cursor: Cursor) -> tuple[Sample, Cursor]:
    """Draw the next sample; datasets advance in order and the cycle repeats reshuffled."""
    cycle, idx, pos = cursor.cycle, cursor.spec_index, cursor.position
    if pos >= len(schedule.datasets[idx]):
        idx, pos = idx + 1, 0
        if idx >= len(schedule.specs):
            cycle, idx = cycle + 1, 0
    sample = schedule.datasets[idx][schedule.order(cycle, idx)[pos]]
    return sample, Cursor(cycle, idx, pos + 1)


def current_spec(schedule: GenerationSchedule, cursor: Cursor) -> EnvironmentSpec:
    """Spec that produced the most recent draw at ``cursor``."""
    return schedule.specs[cursor.spec_index]


class SampleStream:
    """Mutable convenience wrapper around :func:`next_sample` for one agent."""

    def __init__(self, schedule: GenerationSchedule):
        self.schedule = schedule
        self.cursor = Cursor()

    def __iter__(self):
        return self

    def __next__(self) -> Sample:
        sample, self.cursor = next_sample(self.schedule, self.cursor)
        return sample
