"""Random genome builders for fuzz and property tests."""

from __future__ import annotations

import numpy as np

from nagi.config import MutationRates
from nagi.genome import (
    ConnectionGene,
    Genome,
    InnovationRegistry,
    NodeGene,
    NodeKind,
    minimal_genome,
    mutate,
    random_attributes,
)

HEAVY = MutationRates(
    add_connection=0.6,
    add_node=0.4,
    toggle_enable=0.3,
    flip_transmitter=0.3,
    switch_plasticity=0.3,
    perturb_amplitudes=0.3,
)


def evolved_genome(rng: np.random.Generator, n_sensors: int = 1, rounds: int = 10) -> Genome:
    """Minimal genome pushed through ``rounds`` heavy mutations."""
    g = minimal_genome(n_sensors, 2, rng)
    registry = InnovationRegistry.for_genome(g)
    for _ in range(rounds):
        g = mutate(g, registry, rng, HEAVY)
    return g


def random_network_genome(rng: np.random.Generator, n_neurons: int = 50, n_inputs: int = 4, p_connect: float = 0.15) -> Genome:
    """Dense random recurrent genome with ``n_neurons`` non-input nodes (2 outputs)."""
    nodes = [NodeGene(i, NodeKind.INPUT) for i in range(n_inputs)]
    for k in range(n_neurons):
        kind = NodeKind.OUTPUT if k < 2 else NodeKind.HIDDEN
        transmitter, rule = random_attributes(rng, (0.001, 0.1))
        nodes.append(NodeGene(n_inputs + k, kind, transmitter, rule))
    conns = []
    innovation = 0
    for src in range(n_inputs + n_neurons):
        for dst in range(n_inputs, n_inputs + n_neurons):
            if rng.random() < p_connect:
                conns.append(ConnectionGene(innovation, src, dst, bool(rng.random() < 0.95)))
                innovation += 1
    return Genome(tuple(nodes), tuple(conns))
