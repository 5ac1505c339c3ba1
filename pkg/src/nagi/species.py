"""Speciation by compatibility distance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from nagi.genome import Genome, compatibility


@dataclass
class Species:
    key: int
    representative: Genome
    created: int = 0
    members: list[Genome] = field(default_factory=list)
    best_fitness: float = -math.inf
    last_improved: int = 0

    def stagnant(self, generation: int, limit: int) -> bool:
        return generation - self.last_improved >= limit


def speciate(
    population: Sequence[Genome],
    species: Sequence[Species],
    threshold: float,
    coeffs: tuple[float, float, float] = (1.0, 1.0, 0.5),
    rng: np.random.Generator | None = None,
    next_key: int = 0,
    generation: int = 0,
) -> list[Species]:
    """Assign every genome to the first species whose representative is within ``threshold``.

    Genomes that fit nowhere found a new species (and become its
    representative). Species left without members are dropped. When ``rng`` is
    given, each surviving species then draws its next representative uniformly
    from its members.
    """
    if threshold <= 0:
        raise ValueError("compatibility threshold must be positive")
    c1, c2, c3 = coeffs
    pool = [
        Species(s.key, s.representative, s.created, [], s.best_fitness, s.last_improved)
        for s in sorted(species, key=lambda s: s.key)
    ]
    for genome in population:
        for s in pool:
            if compatibility(s.representative, genome, c1, c2, c3) < threshold:
                s.members.append(genome)
                break
        else:
            pool.append(Species(next_key, genome, generation, [genome], last_improved=generation))
            next_key += 1
    alive = [s for s in pool if s.members]
    if rng is not None:
        for s in alive:
            s.representative = s.members[int(rng.integers(len(s.members)))]
    return alive
