"""Neuroevolution of spiking controllers with weight-free genomes.

Topology, neurotransmitter types and plasticity rules evolve; synaptic weights
are redrawn for every lifetime, so agents must learn from reward and penalty
inputs while the environment's labelling flips under them.
"""

from nagi.config import RunConfig, load_config
from nagi.evolution import run
from nagi.genome import Genome, load_genome, minimal_genome, save_genome
from nagi.lifetime import evaluate, fitness
from nagi.neuron import build_phenotype

__all__ = [
    "Genome",
    "RunConfig",
    "build_phenotype",
    "evaluate",
    "fitness",
    "load_config",
    "load_genome",
    "minimal_genome",
    "run",
    "save_genome",
]

__version__ = "0.1.0"
