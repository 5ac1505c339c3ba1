"""Generational loop: evaluate, speciate, share fitness, reproduce.

All randomness is keyed on (master seed, purpose, generation, ...), and
fitness evaluations are pure functions of their arguments, so a run is
bit-reproducible regardless of how many worker processes evaluate genomes.
"""

from __future__ import annotations

import logging
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from nagi import seeding
from nagi.config import RunConfig
from nagi.environment import GenerationSchedule, generate_schedule
from nagi.genome import Genome, InnovationRegistry, crossover, minimal_genome, mutate, n_input_channels
from nagi.lifetime import evaluate, trial_seeds
from nagi.species import Species, speciate

log = logging.getLogger(__name__)

N_ACTIONS = 2


class StagnationError(RuntimeError):
    """Every species stagnated at once (only raised when configured to abort)."""


@dataclass
class GenerationRecord:
    generation: int
    best_fitness: float
    mean_fitness: float
    median_fitness: float
    species: int
    mean_nodes: float
    mean_connections: float
    champion_id: int
    champion: Genome = field(repr=False, compare=False)
    champion_meta: dict = field(default_factory=dict, repr=False, compare=False)


@dataclass
class EvolutionResult:
    history: list[GenerationRecord]
    population: list[Genome]
    fitnesses: list[float]


def rank_key(genome: Genome, fitness: float) -> tuple[float, int, int]:
    """Total order used for every selection tie-break: fitness, then size, then id."""
    return (-fitness, len(genome.nodes) + len(genome.connections), genome.key)


def n_sensors_for(config: RunConfig) -> int:
    return 1 if config.environment.variant == "binary1d" else 2


def initial_population(config: RunConfig, master_seed: int) -> list[Genome]:
    rng = seeding.stream(master_seed, seeding.INIT)
    a_range = (config.plasticity.a_min, config.plasticity.a_max)
    n_sensors = n_sensors_for(config)
    return [
        minimal_genome(n_sensors, N_ACTIONS, rng, a_range).with_key(i)
        for i in range(config.evolution.population_size)
    ]


def _evaluate_task(args: tuple) -> tuple[float, list[int]]:
    genome, schedule, config, master_seed, generation = args
    seeds = trial_seeds(master_seed, generation, genome.key, config.lifetime.n_trials)
    lifetimes = [evaluate(genome, schedule, s, config) for s in seeds]
    return float(np.mean(lifetimes)), lifetimes


def evaluate_population(
    genomes: Sequence[Genome],
    schedule: GenerationSchedule,
    config: RunConfig,
    master_seed: int,
    generation: int,
    workers: int = 1,
) -> list[tuple[float, list[int]]]:
    tasks = [(g, schedule, config, master_seed, generation) for g in genomes]
    if workers <= 1:
        return [_evaluate_task(t) for t in tasks]
    chunk = max(1, math.ceil(len(tasks) / (workers * 4)))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_task, tasks, chunksize=chunk))


def allocate_quotas(
    shares: Sequence[float], sizes: Sequence[int], population_size: int, elitism: int, priority: int = 0
) -> list[int]:
    """Offspring count per species, summing exactly to ``population_size``.

    Each species first keeps ``min(elitism, size)`` elites; the remaining slots
    are split in proportion to ``shares`` with the largest-remainder method.
    If elites alone overflow, species ``priority`` (the champion's) is served
    first, then the others by share.
    """
    n = len(shares)
    elites = [min(elitism, s) for s in sizes]
    if sum(elites) > population_size:
        order = [priority] + sorted((i for i in range(n) if i != priority), key=lambda i: (-shares[i], i))
        capped = [0] * n
        left = population_size
        for i in order:
            capped[i] = min(elites[i], left)
            left -= capped[i]
        return capped
    remaining = population_size - sum(elites)
    total = sum(shares)
    weights = [s / total for s in shares] if total > 0 else [1.0 / n] * n
    exact = [w * remaining for w in weights]
    extra = [math.floor(x) for x in exact]
    short = remaining - sum(extra)
    by_remainder = sorted(range(n), key=lambda i: (-(exact[i] - extra[i]), i))
    for i in by_remainder[:short]:
        extra[i] += 1
    return [e + x for e, x in zip(elites, extra)]


def _tournament(ranked: Sequence[Genome], size: int, rng: np.random.Generator) -> int:
    picks = rng.integers(len(ranked), size=size)
    return int(min(picks))


def reproduce_species(
    members: Sequence[Genome],
    fitnesses: Sequence[float],
    quota: int,
    registry: InnovationRegistry,
    rng: np.random.Generator,
    config: RunConfig,
    next_key: Callable[[], int],
) -> list[Genome]:
    """Elites copied unchanged, the rest bred from the top survival fraction.

    Offspring come from crossover of two tournament winners (the better-ranked
    one acts as the fitter parent) followed by mutation.
    """
    if quota <= 0:
        return []
    ev = config.evolution
    order = sorted(range(len(members)), key=lambda i: rank_key(members[i], fitnesses[i]))
    ranked = [members[i] for i in order]
    n_elite = min(ev.elitism, quota, len(ranked))
    offspring = list(ranked[:n_elite])
    survivors = ranked[: max(1, math.ceil(ev.survival_fraction * len(ranked)))]
    a_range = (config.plasticity.a_min, config.plasticity.a_max)
    while len(offspring) < quota:
        i = _tournament(survivors, ev.tournament_size, rng)
        j = _tournament(survivors, ev.tournament_size, rng)
        fitter, other = survivors[min(i, j)], survivors[max(i, j)]
        child = crossover(fitter, other, rng)
        child = mutate(child, registry, rng, config.genome.mutation, a_range)
        offspring.append(child.with_key(next_key()))
    return offspring


def _record(
    generation: int,
    genomes: Sequence[Genome],
    results: Sequence[tuple[float, list[int]]],
    n_species: int,
    env_seed: int,
    master_seed: int,
    eval_generation: int,
) -> GenerationRecord:
    fits = [r[0] for r in results]
    best = min(range(len(genomes)), key=lambda i: rank_key(genomes[i], fits[i]))
    champ = genomes[best]
    meta = {
        "generation": generation,
        "genome_id": champ.key,
        "fitness": fits[best],
        "lifetimes": list(results[best][1]),
        "env_seed": env_seed,
        "weight_seeds": trial_seeds(master_seed, eval_generation, champ.key, len(results[best][1])),
    }
    return GenerationRecord(
        generation=generation,
        best_fitness=fits[best],
        mean_fitness=float(np.mean(fits)),
        median_fitness=float(statistics.median(fits)),
        species=n_species,
        mean_nodes=float(np.mean([len(g.nodes) for g in genomes])),
        mean_connections=float(np.mean([g.n_enabled for g in genomes])),
        champion_id=champ.key,
        champion=champ,
        champion_meta=meta,
    )


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("NAGI_WORKERS")
    return max(1, int(env)) if env else 1


def run(
    config: RunConfig,
    master_seed: int | None = None,
    workers: int | None = None,
    on_generation: Callable[[GenerationRecord], None] | None = None,
) -> EvolutionResult:
    """Evolve a population for ``config.evolution.generations`` generations."""
    seed = config.master_seed if master_seed is None else master_seed
    workers = resolve_workers(workers)
    ev = config.evolution
    gcfg = config.genome
    coeffs = (gcfg.c1, gcfg.c2, gcfg.c3)

    genomes = initial_population(config, seed)
    n_in = n_input_channels(n_sensors_for(config))
    registry = InnovationRegistry(n_in * N_ACTIONS, n_in + N_ACTIONS)
    key_counter = iter(range(len(genomes), 1 << 62))
    species: list[Species] = []
    next_species = 0
    history: list[GenerationRecord] = []
    fits: list[float] = []

    for gen in range(ev.generations):
        eval_gen = 0 if ev.freeze_schedule else gen
        env_seed = seeding.generation_seed(seed, eval_gen)
        schedule = generate_schedule(env_seed, config.environment)
        results = evaluate_population(genomes, schedule, config, seed, eval_gen, workers)
        fits = [r[0] for r in results]
        fitness_of = {g.key: f for g, f in zip(genomes, fits)}

        rng = seeding.stream(seed, seeding.REPRODUCTION, gen)
        species = speciate(
            genomes, species, gcfg.compatibility_threshold, coeffs, rng, next_species, gen
        )
        next_species = max(next_species, max(s.key for s in species) + 1)

        record = _record(gen, genomes, results, len(species), env_seed, seed, eval_gen)
        history.append(record)
        log.info(
            "generation %d: best %.1f mean %.1f species %d", gen, record.best_fitness, record.mean_fitness, len(species)
        )
        if on_generation is not None:
            on_generation(record)
        if gen == ev.generations - 1:
            break

        for s in species:
            best = max(fitness_of[g.key] for g in s.members)
            if best > s.best_fitness:
                s.best_fitness = best
                s.last_improved = gen
        champ_species = next(i for i, s in enumerate(species) if any(g.key == record.champion_id for g in s.members))
        stagnant = [s.stagnant(gen, ev.stagnation_limit) for s in species]
        if all(stagnant):
            if ev.abort_on_total_stagnation:
                raise StagnationError(
                    f"all species stagnated at generation {gen}; restart with a new seed or a larger population"
                )
            log.warning("all species stagnant at generation %d; keeping the champion's species", gen)
        keep = [s for i, s in enumerate(species) if i == champ_species or not stagnant[i]]
        champ_species = next(i for i, s in enumerate(keep) if any(g.key == record.champion_id for g in s.members))
        species = keep

        sizes = [len(s.members) for s in species]
        # fitness sharing: adjusted fitness = fitness / species size, summed per species
        shares = [sum(fitness_of[g.key] for g in s.members) / len(s.members) for s in species]
        quotas = allocate_quotas(shares, sizes, ev.population_size, ev.elitism, champ_species)

        registry.new_generation()
        offspring: list[Genome] = []
        for s, quota in zip(species, quotas):
            offspring += reproduce_species(
                s.members,
                [fitness_of[g.key] for g in s.members],
                quota,
                registry,
                rng,
                config,
                lambda: next(key_counter),
            )
        genomes = offspring

    return EvolutionResult(history, genomes, fits)
