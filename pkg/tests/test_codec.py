import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nagi.codec import AVOID, EAT, SpikeCountWindow, channel_rates, choose_action, decode_action, encode_sample, encode_value

from oracles import binomial_band, window_counts


class TestEncodeValue:
    def test_zero_never_spikes(self, rng):
        assert not any(encode_value(0.0, rng, 0.1) for _ in range(10_000))

    @pytest.mark.parametrize("x", [1.0, 0.5])
    def test_rate_within_binomial_band(self, x):
        rng = np.random.default_rng(77)
        n = 100_000
        freq = sum(encode_value(x, rng, 0.1) for _ in range(n)) / n
        lo, hi = binomial_band(x * 0.1, n)
        assert lo <= freq <= hi

    @pytest.mark.parametrize("x", [-0.01, 1.01])
    def test_rejects_out_of_range(self, rng, x):
        with pytest.raises(ValueError):
            encode_value(x, rng)


class TestEncodeSample:
    def test_black_sample_complement_channel_only(self, rng):
        assert channel_rates([0.0], False, False) == [0.0, 1.0, 0.0, 0.0]
        for _ in range(2000):
            spikes = encode_sample([0.0], False, False, rng)
            assert not spikes[0] and not spikes[2] and not spikes[3]

    def test_two_sensor_rates(self):
        assert channel_rates([0.3, 0.8], True, False) == pytest.approx([0.3, 0.7, 0.8, 0.2, 1.0, 0.0])

    def test_reward_channel_rate(self):
        rng = np.random.default_rng(3)
        n = 50_000
        hits = sum(encode_sample([1.0], True, False, rng)[2] for _ in range(n))
        lo, hi = binomial_band(0.1, n)
        assert lo <= hits / n <= hi

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=5), st.booleans(), st.booleans())
    def test_channel_count(self, sensors, reward, penalty):
        out = encode_sample(sensors, reward, penalty, np.random.default_rng(0))
        assert len(out) == 2 * len(sensors) + 2


class TestDecode:
    def test_argmax(self):
        assert choose_action([5, 2], AVOID) == EAT

    def test_tie_keeps_current(self):
        assert choose_action([3, 3], AVOID) == AVOID
        assert choose_action([3, 3], EAT) == EAT

    def test_default_before_any_spike(self):
        w = SpikeCountWindow(2, 20)
        assert decode_action(w, [False, False]) == AVOID

    def test_window_forgets(self):
        w = SpikeCountWindow(2, 3)
        decode_action(w, [True, False])
        for _ in range(3):
            decode_action(w, [False, False])
        assert w.counts == [0, 0]

    @given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=1), st.sampled_from([EAT, AVOID]))
    def test_scaling_invariance(self, pairs, current):
        for a, b in pairs:
            assert choose_action([a, b], current) == choose_action([2 * a, 2 * b], current)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.integers(2, 4))
    def test_counts_match_brute_force(self, seed, window, n_out):
        rng = np.random.default_rng(seed)
        trace = (rng.random((200, n_out)) < 0.3).tolist()
        w = SpikeCountWindow(n_out, window)
        for t, row in enumerate(trace):
            decode_action(w, row)
            assert w.counts == window_counts(trace[: t + 1], window)
