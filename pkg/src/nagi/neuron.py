"""Spiking-network phenotype built from a weight-free genome.

Non-input nodes are Izhikevich neurons integrated with a 1 ms step (the
membrane potential in two 0.5 ms half-steps). Input nodes are pure spike
sources. Synapses are delta currents: an input spike at step ``t`` reaches its
targets at step ``t``; a neuron spike at step ``t`` is delivered at ``t + 1``
(recurrent loops are allowed, so neuron-to-neuron traffic needs one step of
latency to be well defined).

State is kept in flat Python lists indexed by position, which for the small
networks evolved here is considerably faster than numpy per-step calls.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from nagi.config import NeuronConfig, PlasticityConfig
from nagi.genome import Genome, GenomeError, NodeKind, Transmitter
from nagi.plasticity import PlasticityRule, normalize_incoming, on_post_spike, on_pre_spike


class SimulationFault(RuntimeError):
    """Non-finite membrane state; indicates a simulator bug or absurd parameters."""


def izhikevich_step(v: float, u: float, current: float, a: float, b: float) -> tuple[float, float]:
    """Advance one 1 ms step without the spike/reset check."""
    v += 0.5 * (0.04 * v * v + 5.0 * v + 140.0 - u + current)
    v += 0.5 * (0.04 * v * v + 5.0 * v + 140.0 - u + current)
    u += a * (b * v - u)
    return v, u


class NetworkPhenotype:
    """Executable network.

    Neuron ``k`` (``0 <= k < n_neurons``) is the ``k``-th non-input node,
    outputs first (in ``output_ids`` order) then hidden nodes by id. Spike
    sources are indexed globally: inputs ``0..n_inputs-1``, then neurons at
    ``n_inputs + k``.
    """

    def __init__(
        self,
        genome: Genome,
        weight_seed: int,
        neuron_cfg: NeuronConfig | None = None,
        plasticity_cfg: PlasticityConfig | None = None,
    ):
        self.genome = genome
        self.neuron_cfg = neuron_cfg or NeuronConfig()
        self.plasticity_cfg = plasticity_cfg or PlasticityConfig()
        self.observer: Callable[[NetworkPhenotype, int], None] | None = None
        self._wire()
        self._randomize(weight_seed)

    def _wire(self) -> None:
        g = self.genome
        self.input_ids = g.input_ids
        self.output_ids = g.output_ids
        self.neuron_ids = self.output_ids + g.hidden_ids
        self.n_inputs = len(self.input_ids)
        self.n_outputs = len(self.output_ids)
        self.n_neurons = len(self.neuron_ids)
        index = {nid: i for i, nid in enumerate(self.input_ids)}
        index.update({nid: self.n_inputs + k for k, nid in enumerate(self.neuron_ids)})
        self.index = index

        pcfg = self.plasticity_cfg
        self.rules: list[PlasticityRule] = []
        source_sign = [1.0] * self.n_inputs
        for nid in self.neuron_ids:
            node = g.node(nid)
            p = node.plasticity
            self.rules.append(PlasticityRule.from_gene(p.kind, p.a_plus, p.a_minus, pcfg))
            source_sign.append(-1.0 if node.neurotransmitter is Transmitter.INHIBITORY else 1.0)

        self.pre: list[int] = []
        self.post: list[int] = []
        self.sign: list[float] = []
        for c in g.connections:
            if not c.enabled:
                continue
            if c.in_node not in index or c.out_node not in index:
                raise GenomeError(f"connection {c.innovation} references an undefined node")
            target = index[c.out_node] - self.n_inputs
            if target < 0:
                raise GenomeError(f"connection {c.innovation} targets an input node")
            self.pre.append(index[c.in_node])
            self.post.append(target)
            self.sign.append(source_sign[index[c.in_node]])
        self.n_synapses = len(self.pre)
        self.incoming: list[list[int]] = [[] for _ in range(self.n_neurons)]
        self.outgoing: list[list[int]] = [[] for _ in range(self.n_inputs + self.n_neurons)]
        for s in range(self.n_synapses):
            self.incoming[self.post[s]].append(s)
            self.outgoing[self.pre[s]].append(s)
        self.w_max = self.neuron_cfg.w_max
        self.w_cap = pcfg.w_cap

    def _randomize(self, weight_seed: int) -> None:
        cfg = self.neuron_cfg
        rng = np.random.default_rng(weight_seed)
        self.weight_seed = weight_seed
        self.magnitude: list[float] = rng.uniform(cfg.w_init_lo, cfg.w_init_hi, size=self.n_synapses).tolist()
        self.v: list[float] = [cfg.c] * self.n_neurons
        self.u: list[float] = [cfg.b * cfg.c] * self.n_neurons
        self.last_spike: list[int | None] = [None] * (self.n_inputs + self.n_neurons)
        self.pending: list[int] = []
        self.step_counter = 0
        # high fan-in neurons can start above the cap; bring them under it before the first step
        for k in range(self.n_neurons):
            normalize_incoming(self, k)

    @property
    def edges(self) -> set[tuple[int, int]]:
        """Genome node-id pairs of all synapses."""
        gid = self.input_ids + self.neuron_ids
        return {(gid[p], self.neuron_ids[q]) for p, q in zip(self.pre, self.post)}

    def topology_report(self) -> dict:
        return {
            "inputs": len(self.input_ids),
            "outputs": len(self.output_ids),
            "hidden": self.n_neurons - self.n_outputs,
            "synapses": sorted(self.edges),
            "signs": list(self.sign),
        }

    def incoming_sums(self) -> list[float]:
        return [math.fsum(self.magnitude[s] for s in inc) for inc in self.incoming]

    def step(self, input_spikes: Sequence[bool]) -> list[bool]:
        """Advance one millisecond; returns spike flags of the output neurons."""
        if len(input_spikes) != self.n_inputs:
            raise ValueError(f"expected {self.n_inputs} input flags, got {len(input_spikes)}")
        cfg = self.neuron_cfg
        now = self.step_counter
        n_in = self.n_inputs
        mag, sign, post, outgoing, last = self.magnitude, self.sign, self.post, self.outgoing, self.last_spike
        scale = cfg.current_scale
        current = [0.0] * self.n_neurons

        fired_sources = [i for i in range(n_in) if input_spikes[i]]
        for i in fired_sources:
            last[i] = now
        for src in fired_sources + [n_in + k for k in self.pending]:
            for s in outgoing[src]:
                current[post[s]] += sign[s] * mag[s] * scale

        a, b, c, d, thr = cfg.a, cfg.b, cfg.c, cfg.d, cfg.v_threshold
        v, u = self.v, self.u
        spiked = []
        for k in range(self.n_neurons):
            vk, uk = izhikevich_step(v[k], u[k], current[k], a, b)
            if vk >= thr:
                spiked.append(k)
                vk = c
                uk += d
            elif not math.isfinite(vk) or not math.isfinite(uk):
                raise SimulationFault(f"non-finite state in neuron {self.neuron_ids[k]} at step {now}")
            v[k] = vk
            u[k] = uk

        for k in spiked:
            last[n_in + k] = now
            on_post_spike(self, k, now)
        for src in fired_sources + [n_in + k for k in spiked]:
            for s in outgoing[src]:
                on_pre_spike(self, s, now)

        self.pending = spiked
        self.step_counter = now + 1
        fired = [False] * self.n_outputs
        for k in spiked:
            if k < self.n_outputs:
                fired[k] = True
        return fired


def build_phenotype(
    genome: Genome,
    weight_seed: int,
    neuron_cfg: NeuronConfig | None = None,
    plasticity_cfg: PlasticityConfig | None = None,
) -> NetworkPhenotype:
    """Untrained network for ``genome`` with magnitudes drawn from ``weight_seed``."""
    return NetworkPhenotype(genome, weight_seed, neuron_cfg, plasticity_cfg)


def step(net: NetworkPhenotype, input_spikes: Sequence[bool]) -> list[bool]:
    return net.step(input_spikes)


def reset(net: NetworkPhenotype, weight_seed: int) -> NetworkPhenotype:
    """Fresh lifetime: same topology, magnitudes redrawn, all dynamic state cleared."""
    net._randomize(weight_seed)
    return net
