import numpy as np
import pytest

from nagi.codec import AVOID, EAT
from nagi.config import EnvironmentConfig
from nagi.environment import (
    Cursor,
    EnvironmentSpec,
    ScheduleError,
    SampleStream,
    _eat_fraction,
    generate_schedule,
    label,
    next_sample,
)

BIN = EnvironmentConfig()
LIN = EnvironmentConfig(variant="linear2d")


class TestLabel:
    def test_white_is_food(self):
        assert label(EnvironmentSpec("binary1d", False), (1.0,)) == EAT
        assert label(EnvironmentSpec("binary1d", False), (0.0,)) == AVOID

    def test_flipped(self):
        assert label(EnvironmentSpec("binary1d", True), (1.0,)) == AVOID

    def test_half_plane(self):
        spec = EnvironmentSpec("linear2d", False, (1.0, 0.0), -0.5)
        assert label(spec, (0.7, 0.2)) == EAT
        assert label(spec, (0.3, 0.2)) == AVOID

    def test_arity_checked(self):
        with pytest.raises(ValueError):
            label(EnvironmentSpec("binary1d", False), (0.1, 0.2))

    def test_flip_inverts_pointwise(self):
        rng = np.random.default_rng(0)
        for s in (0.0, 1.0):
            assert label(EnvironmentSpec("binary1d", True), (s,)) != label(EnvironmentSpec("binary1d", False), (s,))
        spec = generate_schedule(4, LIN).specs[0]
        for p in rng.random((500, 2)).tolist():
            assert label(spec, p) != label(spec.flip(), p)


class TestSchedule:
    @pytest.mark.parametrize("cfg", [BIN, LIN])
    def test_deterministic(self, cfg):
        assert generate_schedule(123, cfg) == generate_schedule(123, cfg)
        assert generate_schedule(123, cfg) != generate_schedule(124, cfg)

    def test_binary_alternates(self):
        s = generate_schedule(0, BIN)
        assert [spec.flipped for spec in s.specs] == [False, True, False, True]

    def test_binary_balanced(self):
        for ds in generate_schedule(9, BIN).datasets:
            values = [x.sensors[0] for x in ds]
            assert values.count(0.0) == values.count(1.0) == 20

    def test_linear_balance_over_1000_specs(self):
        cfg = EnvironmentConfig(variant="linear2d", specs_per_cycle=1)
        for seed in range(1000):
            sched = generate_schedule(seed, cfg)
            for spec, ds in zip(sched.specs, sched.datasets):
                points = np.array([x.sensors for x in ds])
                assert 0.4 <= _eat_fraction(spec, points) <= 0.6

    def test_linear_second_is_flip_of_first(self):
        s = generate_schedule(5, LIN)
        assert s.specs[1] == s.specs[0].flip() and s.specs[3] == s.specs[2].flip()
        assert s.specs[2].normal != s.specs[0].normal

    def test_rejection_gives_up(self):
        with pytest.raises(ScheduleError):
            generate_schedule(0, EnvironmentConfig(variant="linear2d", balance_lo=0.5, balance_hi=0.5, dataset_size=41, max_rejections=50))


class TestStream:
    def test_forty_draws_before_switch(self):
        s = generate_schedule(1, BIN)
        cur = Cursor()
        for _ in range(40):
            _, cur = next_sample(s, cur)
            assert cur.spec_index == 0
        sample, cur = next_sample(s, cur)
        assert cur.spec_index == 1

    def test_draw_41_inverts_mapping(self):
        s = generate_schedule(1, BIN)
        draws = list(zip(range(80), SampleStream(s)))
        first = {x.sensors: x.label for _, x in draws[:40]}
        second = {x.sensors: x.label for _, x in draws[40:]}
        assert all(first[k] != second[k] for k in first)

    @pytest.mark.parametrize("cfg", [BIN, LIN])
    def test_labels_consistent_and_cycling(self, cfg):
        s = generate_schedule(2, cfg)
        cur = Cursor()
        for _ in range(40 * 4 * 3 + 7):
            sample, cur = next_sample(s, cur)
            assert sample.label == label(s.specs[cur.spec_index], sample.sensors)
        assert cur.cycle == 3

    def test_cycles_reshuffle(self):
        s = generate_schedule(2, BIN)
        stream = SampleStream(s)
        first = [next(stream).sensors for _ in range(160)]
        second = [next(stream).sensors for _ in range(160)]
        assert first != second
        assert sorted(first) == sorted(second)

    def test_two_consumers_see_same_sequence(self):
        s = generate_schedule(8, LIN)
        a, b = SampleStream(s), SampleStream(s)
        assert [next(a) for _ in range(300)] == [next(b) for _ in range(300)]
