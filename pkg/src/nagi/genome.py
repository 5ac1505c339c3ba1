"""Weight-free NEAT-style genotype.

A genome describes topology (connection genes with historical markings), the
neurotransmitter of every non-input node and its plasticity rule. It carries no
synaptic weights: those are drawn afresh whenever a phenotype is built.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from nagi.config import MutationRates
from nagi.plasticity import RULE_KINDS, RuleKind

FORMAT_VERSION = 1


class GenomeError(ValueError):
    """Structurally invalid genome or malformed genome document."""


class NodeKind(str, Enum):
    INPUT = "input"
    HIDDEN = "hidden"
    OUTPUT = "output"


class Transmitter(str, Enum):
    EXCITATORY = "excitatory"
    INHIBITORY = "inhibitory"


@dataclass(frozen=True)
class PlasticityGene:
    kind: RuleKind
    a_plus: float
    a_minus: float


@dataclass(frozen=True)
class NodeGene:
    id: int
    kind: NodeKind
    neurotransmitter: Transmitter | None = None
    plasticity: PlasticityGene | None = None


@dataclass(frozen=True)
class ConnectionGene:
    innovation: int
    in_node: int
    out_node: int
    enabled: bool = True


@dataclass(frozen=True)
class Genome:
    nodes: tuple[NodeGene, ...]
    connections: tuple[ConnectionGene, ...]
    key: int = field(default=-1, compare=False)

    @property
    def input_ids(self) -> list[int]:
        return [n.id for n in self.nodes if n.kind is NodeKind.INPUT]

    @property
    def output_ids(self) -> list[int]:
        return [n.id for n in self.nodes if n.kind is NodeKind.OUTPUT]

    @property
    def hidden_ids(self) -> list[int]:
        return [n.id for n in self.nodes if n.kind is NodeKind.HIDDEN]

    @property
    def n_hidden(self) -> int:
        return sum(1 for n in self.nodes if n.kind is NodeKind.HIDDEN)

    @property
    def n_enabled(self) -> int:
        return sum(1 for c in self.connections if c.enabled)

    def node(self, node_id: int) -> NodeGene:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def with_key(self, key: int) -> "Genome":
        return replace(self, key=key)


def _make(nodes: Iterable[NodeGene], connections: Iterable[ConnectionGene], key: int = -1) -> Genome:
    return Genome(
        tuple(sorted(nodes, key=lambda n: n.id)),
        tuple(sorted(connections, key=lambda c: c.innovation)),
        key,
    )


class InnovationRegistry:
    """Hands out innovation numbers and node ids.

    Within one generation the same structural mutation (same connection pair,
    or same split connection) always gets the same number. Counters persist
    across generations; the memo of assignments is cleared by
    :meth:`new_generation`.
    """

    def __init__(self, next_innovation: int = 0, next_node_id: int = 0):
        self.next_innovation = next_innovation
        self.next_node_id = next_node_id
        self._connections: dict[tuple[int, int], int] = {}
        self._splits: dict[int, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def for_genome(cls, genome: Genome) -> "InnovationRegistry":
        return cls(
            max((c.innovation for c in genome.connections), default=-1) + 1,
            max((n.id for n in genome.nodes), default=-1) + 1,
        )

    def new_generation(self) -> None:
        with self._lock:
            self._connections.clear()
            self._splits.clear()

    def connection(self, in_node: int, out_node: int) -> int:
        with self._lock:
            pair = (in_node, out_node)
            if pair not in self._connections:
                self._connections[pair] = self.next_innovation
                self.next_innovation += 1
            return self._connections[pair]

    def split_node(self, innovation: int) -> int:
        with self._lock:
            if innovation not in self._splits:
                self._splits[innovation] = self.next_node_id
                self.next_node_id += 1
            return self._splits[innovation]

    def fresh_node(self) -> int:
        with self._lock:
            self.next_node_id += 1
            return self.next_node_id - 1


def random_attributes(rng: np.random.Generator, a_range: tuple[float, float]) -> tuple[Transmitter, PlasticityGene]:
    transmitter = (Transmitter.EXCITATORY, Transmitter.INHIBITORY)[int(rng.integers(2))]
    kind = RULE_KINDS[int(rng.integers(len(RULE_KINDS)))]
    lo, hi = a_range
    a_plus, a_minus = rng.uniform(lo, hi, size=2)
    return transmitter, PlasticityGene(kind, float(a_plus), float(a_minus))


def n_input_channels(n_sensors: int) -> int:
    """Two complementary channels per sensor plus reward and penalty."""
    return 2 * n_sensors + 2


def minimal_genome(
    n_sensors: int,
    n_actions: int,
    rng: np.random.Generator,
    a_range: tuple[float, float] = (0.001, 0.1),
) -> Genome:
    """Fully connected input->output genome without hidden nodes.

    Input ids are ``0..n_in-1`` and output ids follow; the connection from input
    ``i`` to output ``j`` has innovation ``i * n_actions + j`` so every minimal
    genome of a run shares its historical markings.
    """
    if n_sensors < 1 or n_actions < 2:
        raise GenomeError("need at least one sensor and two actions")
    n_in = n_input_channels(n_sensors)
    nodes = [NodeGene(i, NodeKind.INPUT) for i in range(n_in)]
    for j in range(n_actions):
        transmitter, rule = random_attributes(rng, a_range)
        nodes.append(NodeGene(n_in + j, NodeKind.OUTPUT, transmitter, rule))
    conns = [
        ConnectionGene(i * n_actions + j, i, n_in + j, True)
        for i in range(n_in)
        for j in range(n_actions)
    ]
    return _make(nodes, conns)


# -- validation ---------------------------------------------------------------


def validate_genome(genome: Genome, a_range: tuple[float, float] | None = None) -> Genome:
    """Raise :class:`GenomeError` unless ``genome`` is structurally valid."""
    ids = [n.id for n in genome.nodes]
    if len(set(ids)) != len(ids):
        raise GenomeError("duplicate node ids")
    kinds = {n.id: n.kind for n in genome.nodes}
    if not any(k is NodeKind.INPUT for k in kinds.values()):
        raise GenomeError("genome has no input nodes")
    if sum(k is NodeKind.OUTPUT for k in kinds.values()) < 2:
        raise GenomeError("genome needs at least two output nodes")
    for n in genome.nodes:
        if n.kind is NodeKind.INPUT:
            if n.neurotransmitter is not None or n.plasticity is not None:
                raise GenomeError(f"input node {n.id} carries neuron attributes")
        else:
            if n.neurotransmitter is None or n.plasticity is None:
                raise GenomeError(f"node {n.id} lacks neurotransmitter or plasticity")
            if a_range is not None:
                lo, hi = a_range
                p = n.plasticity
                if not (lo <= p.a_plus <= hi and lo <= p.a_minus <= hi):
                    raise GenomeError(f"node {n.id} plasticity amplitudes outside [{lo}, {hi}]")
    pairs = set()
    last = None
    for c in genome.connections:
        if last is not None and c.innovation <= last:
            raise GenomeError("innovation numbers must strictly increase")
        last = c.innovation
        if c.in_node not in kinds or c.out_node not in kinds:
            raise GenomeError(f"connection {c.innovation} references an undefined node")
        if kinds[c.out_node] is NodeKind.INPUT:
            raise GenomeError(f"connection {c.innovation} targets input node {c.out_node}")
        pair = (c.in_node, c.out_node)
        if pair in pairs:
            raise GenomeError(f"duplicate connection {pair}")
        pairs.add(pair)
    return genome


# -- variation ----------------------------------------------------------------


def _add_connection(genome: Genome, registry: InnovationRegistry, rng: np.random.Generator) -> Genome:
    existing = {(c.in_node, c.out_node) for c in genome.connections}
    targets = [n.id for n in genome.nodes if n.kind is not NodeKind.INPUT]
    candidates = [(a.id, b) for a in genome.nodes for b in targets if (a.id, b) not in existing]
    if not candidates:
        return genome
    in_node, out_node = candidates[int(rng.integers(len(candidates)))]
    gene = ConnectionGene(registry.connection(in_node, out_node), in_node, out_node, True)
    return _make(genome.nodes, genome.connections + (gene,), genome.key)


def _add_node(
    genome: Genome, registry: InnovationRegistry, rng: np.random.Generator, a_range: tuple[float, float]
) -> Genome:
    enabled = [c for c in genome.connections if c.enabled]
    if not enabled:
        return genome
    split = enabled[int(rng.integers(len(enabled)))]
    node_id = registry.split_node(split.innovation)
    existing = {n.id for n in genome.nodes}
    if node_id in existing:
        node_id = registry.fresh_node()
    transmitter, rule = random_attributes(rng, a_range)
    conns = [replace(c, enabled=False) if c.innovation == split.innovation else c for c in genome.connections]
    conns.append(ConnectionGene(registry.connection(split.in_node, node_id), split.in_node, node_id, True))
    conns.append(ConnectionGene(registry.connection(node_id, split.out_node), node_id, split.out_node, True))
    nodes = genome.nodes + (NodeGene(node_id, NodeKind.HIDDEN, transmitter, rule),)
    return _make(nodes, conns, genome.key)


def _replace_node(genome: Genome, node: NodeGene) -> Genome:
    return _make((node if n.id == node.id else n for n in genome.nodes), genome.connections, genome.key)


def _pick_neuron(genome: Genome, rng: np.random.Generator) -> NodeGene:
    neurons = [n for n in genome.nodes if n.kind is not NodeKind.INPUT]
    return neurons[int(rng.integers(len(neurons)))]


def mutate(
    genome: Genome,
    registry: InnovationRegistry,
    rng: np.random.Generator,
    rates: MutationRates,
    a_range: tuple[float, float] = (0.001, 0.1),
) -> Genome:
    """Apply each mutation operator independently with its configured probability."""
    g = genome
    if rng.random() < rates.add_connection:
        g = _add_connection(g, registry, rng)
    if rng.random() < rates.add_node:
        g = _add_node(g, registry, rng, a_range)
    if rng.random() < rates.toggle_enable and g.connections:
        i = int(rng.integers(len(g.connections)))
        conns = list(g.connections)
        conns[i] = replace(conns[i], enabled=not conns[i].enabled)
        g = _make(g.nodes, conns, g.key)
    if rng.random() < rates.flip_transmitter:
        n = _pick_neuron(g, rng)
        flipped = Transmitter.INHIBITORY if n.neurotransmitter is Transmitter.EXCITATORY else Transmitter.EXCITATORY
        g = _replace_node(g, replace(n, neurotransmitter=flipped))
    if rng.random() < rates.switch_plasticity:
        n = _pick_neuron(g, rng)
        others = [k for k in RULE_KINDS if k is not n.plasticity.kind]
        kind = others[int(rng.integers(len(others)))]
        g = _replace_node(g, replace(n, plasticity=replace(n.plasticity, kind=kind)))
    if rng.random() < rates.perturb_amplitudes:
        n = _pick_neuron(g, rng)
        lo, hi = a_range
        d_plus, d_minus = rng.normal(0.0, rates.perturb_sigma, size=2)
        p = n.plasticity
        rule = replace(
            p,
            a_plus=float(min(hi, max(lo, p.a_plus + d_plus))),
            a_minus=float(min(hi, max(lo, p.a_minus + d_minus))),
        )
        g = _replace_node(g, replace(n, plasticity=rule))
    return g


def crossover(fitter: Genome, other: Genome, rng: np.random.Generator) -> Genome:
    """Child with the fitter parent's topology.

    Matching genes take their enabled flag from a uniformly chosen parent and
    matching non-input nodes take their attributes from a uniformly chosen
    parent; disjoint and excess genes come from ``fitter``.
    """
    other_conns = {c.innovation: c for c in other.connections}
    conns = []
    for c in fitter.connections:
        match = other_conns.get(c.innovation)
        if match is not None and rng.random() < 0.5:
            c = replace(c, enabled=match.enabled)
        conns.append(c)
    other_nodes = {n.id: n for n in other.nodes}
    nodes = []
    for n in fitter.nodes:
        match = other_nodes.get(n.id)
        if n.kind is not NodeKind.INPUT and match is not None and match.kind is n.kind and rng.random() < 0.5:
            n = replace(n, neurotransmitter=match.neurotransmitter, plasticity=match.plasticity)
        nodes.append(n)
    return _make(nodes, conns)


def compatibility(g1: Genome, g2: Genome, c1: float = 1.0, c2: float = 1.0, c3: float = 0.5) -> float:
    """Distance ``c1*E/N + c2*D/N + c3*A`` with an attribute-mismatch term ``A``."""
    inn1 = {c.innovation for c in g1.connections}
    inn2 = {c.innovation for c in g2.connections}
    max1 = max(inn1, default=-1)
    max2 = max(inn2, default=-1)
    excess = disjoint = 0
    for i in inn1 ^ inn2:
        if i > (max2 if i in inn1 else max1):
            excess += 1
        else:
            disjoint += 1
    n = max(len(inn1), len(inn2), 1)
    nodes2 = {x.id: x for x in g2.nodes if x.kind is not NodeKind.INPUT}
    shared = differ = 0
    for x in g1.nodes:
        y = nodes2.get(x.id)
        if x.kind is NodeKind.INPUT or y is None:
            continue
        shared += 1
        if x.neurotransmitter != y.neurotransmitter or x.plasticity.kind != y.plasticity.kind:
            differ += 1
    mismatch = differ / shared if shared else 0.0
    return c1 * excess / n + c2 * disjoint / n + c3 * mismatch


# -- persistence --------------------------------------------------------------


def genome_to_dict(genome: Genome, meta: dict[str, Any] | None = None) -> dict[str, Any]:
    nodes = []
    for n in genome.nodes:
        entry: dict[str, Any] = {"id": n.id, "kind": n.kind.value}
        if n.kind is not NodeKind.INPUT:
            entry["neurotransmitter"] = n.neurotransmitter.value
            entry["plasticity"] = {
                "kind": n.plasticity.kind.value,
                "a_plus": n.plasticity.a_plus,
                "a_minus": n.plasticity.a_minus,
            }
        nodes.append(entry)
    doc: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "nodes": nodes,
        "connections": [
            {"innovation": c.innovation, "in": c.in_node, "out": c.out_node, "enabled": c.enabled}
            for c in genome.connections
        ],
    }
    if meta is not None:
        doc["meta"] = meta
    return doc


def find_weight_key(obj: Any, path: str = "$") -> str | None:
    """Path of the first ``weight`` key anywhere in a JSON value, else None."""
    if isinstance(obj, dict):
        for k, v in obj.items():
            if k == "weight":
                return f"{path}.{k}"
            hit = find_weight_key(v, f"{path}.{k}")
            if hit:
                return hit
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            hit = find_weight_key(v, f"{path}[{i}]")
            if hit:
                return hit
    return None


def _check_keys(obj: Any, required: set[str], optional: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise GenomeError(f"{where} must be an object")
    missing = required - obj.keys()
    extra = obj.keys() - required - optional
    if missing:
        raise GenomeError(f"{where} missing keys {sorted(missing)}")
    if extra:
        raise GenomeError(f"{where} has unknown keys {sorted(extra)}")


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise GenomeError(f"{where} must be an integer")
    return value


def _num(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise GenomeError(f"{where} must be a number")
    return float(value)


def genome_from_dict(doc: Any) -> Genome:
    hit = find_weight_key(doc)
    if hit:
        raise GenomeError(f"genome documents must not contain weights (found {hit})")
    _check_keys(doc, {"format_version", "nodes", "connections"}, {"meta"}, "genome")
    if doc["format_version"] != FORMAT_VERSION:
        raise GenomeError(f"unsupported format_version {doc['format_version']!r}")
    if not isinstance(doc["nodes"], list) or not isinstance(doc["connections"], list):
        raise GenomeError("nodes and connections must be arrays")
    nodes = []
    for i, n in enumerate(doc["nodes"]):
        where = f"nodes[{i}]"
        _check_keys(n, {"id", "kind"}, {"neurotransmitter", "plasticity"}, where)
        try:
            kind = NodeKind(n["kind"])
            if kind is NodeKind.INPUT:
                if "neurotransmitter" in n or "plasticity" in n:
                    raise GenomeError(f"{where}: input nodes carry no neuron attributes")
                nodes.append(NodeGene(_int(n["id"], where + ".id"), kind))
                continue
            if "neurotransmitter" not in n or "plasticity" not in n:
                raise GenomeError(f"{where}: neurotransmitter and plasticity are required")
            p = n["plasticity"]
            _check_keys(p, {"kind", "a_plus", "a_minus"}, set(), where + ".plasticity")
            rule = PlasticityGene(RuleKind(p["kind"]), _num(p["a_plus"], where), _num(p["a_minus"], where))
            nodes.append(NodeGene(_int(n["id"], where + ".id"), kind, Transmitter(n["neurotransmitter"]), rule))
        except (ValueError, TypeError) as exc:
            if isinstance(exc, GenomeError):
                raise
            raise GenomeError(f"{where}: {exc}") from exc
    conns = []
    for i, c in enumerate(doc["connections"]):
        where = f"connections[{i}]"
        _check_keys(c, {"innovation", "in", "out", "enabled"}, set(), where)
        if not isinstance(c["enabled"], bool):
            raise GenomeError(f"{where}.enabled must be a boolean")
        conns.append(ConnectionGene(_int(c["innovation"], where), _int(c["in"], where), _int(c["out"], where), c["enabled"]))
    genome = Genome(tuple(nodes), tuple(conns))
    if [n.id for n in genome.nodes] != sorted(n.id for n in genome.nodes):
        genome = _make(genome.nodes, genome.connections)
    validate_genome(genome)
    meta = doc.get("meta") or {}
    key = meta.get("genome_id", -1) if isinstance(meta, dict) else -1
    return genome.with_key(key if isinstance(key, int) else -1)


def save_genome(genome: Genome, path: str | Path, meta: dict[str, Any] | None = None) -> None:
    Path(path).write_text(json.dumps(genome_to_dict(genome, meta), indent=2) + "\n")


def load_genome(path: str | Path) -> tuple[Genome, dict[str, Any]]:
    """Load a genome file; returns the genome and its (possibly empty) ``meta`` block."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise GenomeError(f"cannot read genome {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise GenomeError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    genome = genome_from_dict(doc)
    return genome, dict(doc.get("meta") or {})
