import numpy as np
import pytest

from nagi.config import NeuronConfig
from nagi.genome import ConnectionGene, Genome, GenomeError, NodeGene, NodeKind, PlasticityGene, Transmitter, genome_to_dict
from nagi.neuron import NetworkPhenotype, build_phenotype, izhikevich_step, reset, step
from nagi.plasticity import RuleKind

from builders import evolved_genome, random_network_genome
from oracles import enabled_edges, izhikevich_reference


def drive(currents, cfg=NeuronConfig()):
    """Single isolated neuron through the simulator's update rule."""
    v, u = cfg.c, cfg.b * cfg.c
    trace, spikes = [], []
    for i in currents:
        v, u = izhikevich_step(v, u, i, cfg.a, cfg.b)
        fired = v >= cfg.v_threshold
        if fired:
            v, u = cfg.c, u + cfg.d
        trace.append(v)
        spikes.append(int(fired))
    return np.array(trace), np.array(spikes)


class TestBuild:
    def test_minimal_counts(self, genome_1d):
        net = build_phenotype(genome_1d, 3)
        assert net.n_neurons == 2
        assert net.n_synapses == 8
        assert all(0.1 <= m <= 1.0 for m in net.magnitude)
        assert net.step_counter == 0

    def test_disabled_connection_absent(self, genome_1d):
        conns = list(genome_1d.connections)
        dropped = conns[3]
        conns[3] = ConnectionGene(dropped.innovation, dropped.in_node, dropped.out_node, False)
        net = build_phenotype(Genome(genome_1d.nodes, tuple(conns)), 3)
        assert (dropped.in_node, dropped.out_node) not in net.edges
        assert net.n_synapses == 7

    def test_seeds_change_magnitudes_not_edges(self, genome_1d):
        a, b = build_phenotype(genome_1d, 1), build_phenotype(genome_1d, 2)
        assert a.edges == b.edges
        assert a.magnitude != b.magnitude

    def test_rejects_undefined_node(self, genome_1d):
        bad = Genome(genome_1d.nodes, genome_1d.connections + (ConnectionGene(99, 0, 42, True),))
        with pytest.raises(GenomeError):
            build_phenotype(bad, 0)

    def test_signs_follow_presynaptic_transmitter(self):
        gene = PlasticityGene(RuleKind.ASYMMETRIC_HEBBIAN, 0.01, 0.01)
        nodes = (
            NodeGene(0, NodeKind.INPUT),
            NodeGene(1, NodeKind.OUTPUT, Transmitter.INHIBITORY, gene),
            NodeGene(2, NodeKind.OUTPUT, Transmitter.EXCITATORY, gene),
        )
        conns = (ConnectionGene(0, 0, 1), ConnectionGene(1, 1, 2), ConnectionGene(2, 2, 1))
        net = build_phenotype(Genome(nodes, conns), 0)
        signs = {e: s for e, s in zip([(0, 1), (1, 2), (2, 1)], net.sign)}
        assert signs == {(0, 1): 1.0, (1, 2): -1.0, (2, 1): 1.0}

    @pytest.mark.parametrize("seed", range(100))
    def test_edges_match_brute_force(self, seed):
        g = evolved_genome(np.random.default_rng(seed), n_sensors=1 + seed % 2, rounds=12)
        net = build_phenotype(g, seed)
        assert net.edges == enabled_edges(genome_to_dict(g))


class TestStep:
    def test_rest_stays_silent(self):
        _, spikes = drive([0.0] * 1000)
        ref_trace, ref_spikes = izhikevich_reference([0.0] * 1000, h=0.01)
        assert spikes.sum() == 0 and ref_spikes.sum() == 0

    def test_sustained_current_spikes(self):
        _, spikes = drive([10.0] * 100)
        _, ref = izhikevich_reference([10.0] * 100, h=0.01)
        assert spikes.sum() >= 1
        assert spikes.sum() == ref.sum()

    def test_reset_rule_observed_after_spike(self, genome_1d):
        net = build_phenotype(genome_1d, 0)
        cfg = net.neuron_cfg
        for t in range(200):
            v0, u0 = list(net.v), list(net.u)
            current = [
                sum(net.sign[s] * net.magnitude[s] * cfg.current_scale for s in net.incoming[k])
                for k in range(net.n_neurons)
            ]
            step(net, [True, True, True, True])
            fired = [k for k in range(net.n_neurons) if net.last_spike[net.n_inputs + k] == t]
            if fired:
                k = fired[0]
                _, u_int = izhikevich_step(v0[k], u0[k], current[k], cfg.a, cfg.b)
                assert net.v[k] == cfg.c
                assert net.u[k] == pytest.approx(u_int + cfg.d, abs=1e-12)
                return
        pytest.fail("no spike under saturating input")

    def test_input_length_checked(self, genome_1d):
        with pytest.raises(ValueError):
            build_phenotype(genome_1d, 0).step([True])

    def test_step_counter_and_determinism(self, genome_2d):
        rng = np.random.default_rng(5)
        inputs = (rng.random((500, 6)) < 0.3).tolist()
        a, b = build_phenotype(genome_2d, 9), build_phenotype(genome_2d, 9)
        out_a = [step(a, x) for x in inputs]
        out_b = [step(b, x) for x in inputs]
        assert out_a == out_b
        assert a.step_counter == 500

    def test_last_spike_monotone_and_signs_stable(self):
        rng = np.random.default_rng(1)
        net = build_phenotype(random_network_genome(rng, n_neurons=30), 4)
        signs = list(net.sign)
        prev = list(net.last_spike)
        for _ in range(2000):
            net.step((rng.random(4) < 0.1).tolist())
            for p, q in zip(prev, net.last_spike):
                assert p is None or (q is not None and q >= p)
            prev = list(net.last_spike)
        assert net.sign == signs


class TestReset:
    def test_same_seed_bit_identical(self, genome_1d):
        net = build_phenotype(genome_1d, 11)
        fresh = build_phenotype(genome_1d, 11)
        for _ in range(10_000):
            net.step([True, False, False, True])
        reset(net, 11)
        assert net.step_counter == 0
        assert net.magnitude == fresh.magnitude
        assert net.v == fresh.v and net.u == fresh.u
        assert net.last_spike == fresh.last_spike

    def test_new_seed_new_magnitudes(self, genome_1d):
        net = build_phenotype(genome_1d, 11)
        edges = net.edges
        old = list(net.magnitude)
        reset(net, 12)
        assert net.edges == edges and net.magnitude != old


@pytest.mark.slow
def test_potentials_stay_finite_under_long_random_input():
    rng = np.random.default_rng(2024)
    net = build_phenotype(random_network_genome(rng, n_neurons=50), 1)
    draws = rng.random((1_000_000, 4)) < 0.1
    for row in draws.tolist():
        net.step(row)
    assert all(np.isfinite(net.v)) and all(np.isfinite(net.u))
