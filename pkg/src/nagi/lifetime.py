"""Lifetime evaluation of a single agent in a generation's mutable environment.

The loop mirrors the evaluation procedure of the framework: draw a sample,
reset the reward/penalty flags, and let the agent act on the sample for a fixed
number of steps while both flags feed back as inputs on the following step.
Every step costs health (a penalty costs more than a reward), plus an energy
charge per hidden neuron. The number of steps survived is the fitness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from nagi.codec import SpikeCountWindow, decode_action, encode_sample
from nagi.config import LifetimeConfig, RunConfig
from nagi.environment import Cursor, GenerationSchedule, Sample, next_sample
from nagi.genome import Genome
from nagi.neuron import NetworkPhenotype, build_phenotype
from nagi.seeding import trial_seed

# absorbs float drift from repeated subtraction (e.g. 1000 * 0.1 from 100)
_DEATH_EPS = 1e-9


class Policy(Protocol):
    def __call__(self, sample: Sample, reward: bool, penalty: bool) -> int: ...


@dataclass
class AgentState:
    health: float = 100.0
    lifetime: int = 0
    reward_flag: bool = False
    penalty_flag: bool = False

    @property
    def alive(self) -> bool:
        return self.health > _DEATH_EPS


def health_step(state: AgentState, n_hidden: int, cfg: LifetimeConfig) -> AgentState:
    """Charge one step of living: reward/penalty decrement plus the size charge."""
    cost = cfg.size_decrement * n_hidden
    if state.reward_flag:
        cost += cfg.reward_decrement
    if state.penalty_flag:
        cost += cfg.penalty_decrement
    state.health -= cost
    state.lifetime += 1
    return state


def max_lifetime(n_hidden: int, cfg: LifetimeConfig) -> int:
    return math.ceil(cfg.initial_health / (cfg.reward_decrement + cfg.size_decrement * n_hidden) - 1e-9)


def min_lifetime(n_hidden: int, cfg: LifetimeConfig) -> int:
    return math.floor(cfg.initial_health / (cfg.penalty_decrement + cfg.size_decrement * n_hidden) + 1e-9)


def live(
    policy: Policy,
    schedule: GenerationSchedule,
    n_hidden: int,
    cfg: LifetimeConfig,
    on_step: Callable[[AgentState, Sample, int], None] | None = None,
) -> int:
    """Run ``policy`` until death and return its lifetime in steps."""
    state = AgentState(health=cfg.initial_health)
    cursor = Cursor()
    while state.alive:
        sample, cursor = next_sample(schedule, cursor)
        state.reward_flag = state.penalty_flag = False
        for _ in range(cfg.sample_steps):
            action = policy(sample, state.reward_flag, state.penalty_flag)
            state.reward_flag = action == sample.label
            state.penalty_flag = not state.reward_flag
            health_step(state, n_hidden, cfg)
            if on_step is not None:
                on_step(state, sample, action)
            if not state.alive:
                break
    return state.lifetime


class NetworkAgent:
    """Policy backed by a spiking network: encode, step, decode."""

    def __init__(self, net: NetworkPhenotype, rng: np.random.Generator, config: RunConfig):
        self.net = net
        self.rng = rng
        self.p_max = config.codec.p_max
        self.window = SpikeCountWindow(net.n_outputs, config.codec.window)
        self.last_inputs: list[bool] = []
        self.last_outputs: list[bool] = []

    def __call__(self, sample: Sample, reward: bool, penalty: bool) -> int:
        spikes = encode_sample(sample.sensors, reward, penalty, self.rng, self.p_max)
        out = self.net.step(spikes)
        self.last_inputs, self.last_outputs = spikes, out
        return decode_action(self.window, out)


def make_agent(genome: Genome, weight_seed: int, config: RunConfig) -> NetworkAgent:
    net = build_phenotype(genome, weight_seed, config.neuron, config.plasticity)
    # encoder noise gets its own stream, keyed off the weight seed
    rng = np.random.default_rng([weight_seed, 1])
    return NetworkAgent(net, rng, config)


def evaluate(
    genome: Genome,
    schedule: GenerationSchedule,
    weight_seed: int,
    config: RunConfig,
    on_step: Callable[[AgentState, Sample, int], None] | None = None,
    agent: NetworkAgent | None = None,
) -> int:
    """Lifetime of a freshly built (untrained) agent for ``genome``."""
    agent = agent or make_agent(genome, weight_seed, config)
    return live(agent, schedule, genome.n_hidden, config.lifetime, on_step)


def trial_seeds(master_seed: int, generation: int, genome_id: int, n_trials: int) -> list[int]:
    return [trial_seed(master_seed, generation, genome_id, t) for t in range(n_trials)]


def fitness(
    genome: Genome,
    schedule: GenerationSchedule,
    config: RunConfig,
    generation: int = 0,
    master_seed: int | None = None,
) -> float:
    """Mean lifetime over ``n_trials`` independent weight draws."""
    seed = config.master_seed if master_seed is None else master_seed
    seeds = trial_seeds(seed, generation, genome.key, config.lifetime.n_trials)
    return float(np.mean([evaluate(genome, schedule, s, config) for s in seeds]))


@dataclass
class ScriptedPolicy:
    """Network-free stand-in used to check the health arithmetic."""

    mode: str
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    n_actions: int = 2

    def __call__(self, sample: Sample, reward: bool, penalty: bool) -> int:
        if self.mode == "correct":
            return sample.label
        if self.mode == "wrong":
            return (sample.label + 1) % self.n_actions
        if self.mode == "random":
            return int(self.rng.integers(self.n_actions))
        raise ValueError(f"unknown scripted mode {self.mode!r}")
