"""Rate coding of sensor values and decoding of output spike trains."""

from __future__ import annotations

from collections import deque
from typing import Sequence

import numpy as np

EAT = 0
AVOID = 1
ACTION_NAMES = ("eat", "avoid")


def encode_value(x: float, rng: np.random.Generator, p_max: float = 0.1) -> bool:
    """One Bernoulli(x * p_max) draw: discrete-time approximation of a Poisson train."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"value {x!r} outside [0, 1]")
    return bool(rng.random() < x * p_max)


def channel_rates(sensors: Sequence[float], reward: bool, penalty: bool) -> list[float]:
    """Normalized rate of every input channel: ``[s1, 1-s1, ..., reward, penalty]``."""
    rates = []
    for s in sensors:
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"sensor value {s!r} outside [0, 1]")
        rates.append(float(s))
        rates.append(1.0 - s)
    rates.append(1.0 if reward else 0.0)
    rates.append(1.0 if penalty else 0.0)
    return rates


def encode_sample(
    sensors: Sequence[float],
    reward: bool,
    penalty: bool,
    rng: np.random.Generator,
    p_max: float = 0.1,
) -> list[bool]:
    """Input spike vector for one step; channel count is ``2 * len(sensors) + 2``."""
    rates = channel_rates(sensors, reward, penalty)
    draws = rng.random(len(rates)).tolist()
    return [d < r * p_max for d, r in zip(draws, rates)]


class SpikeCountWindow:
    """Per-output spike counts over the trailing ``window_len`` steps."""

    def __init__(self, n_actions: int, window_len: int = 20, default_action: int = AVOID):
        self.window_len = window_len
        self.counts = [0] * n_actions
        self.current_action = default_action
        self._history: deque[list[bool]] = deque()

    def push(self, spikes: Sequence[bool]) -> None:
        if len(spikes) != len(self.counts):
            raise ValueError(f"expected {len(self.counts)} output flags, got {len(spikes)}")
        spikes = list(spikes)
        self._history.append(spikes)
        for i, s in enumerate(spikes):
            if s:
                self.counts[i] += 1
        if len(self._history) > self.window_len:
            for i, s in enumerate(self._history.popleft()):
                if s:
                    self.counts[i] -= 1


def choose_action(counts: Sequence[int], current_action: int) -> int:
    """Argmax of ``counts``; any tie for the maximum keeps ``current_action``."""
    best = max(counts)
    leaders = [i for i, c in enumerate(counts) if c == best]
    if len(leaders) > 1:
        return current_action
    return leaders[0]


def decode_action(window: SpikeCountWindow, output_spikes: Sequence[bool]) -> int:
    """Push one step of output spikes and return the windowed-majority action."""
    window.push(output_spikes)
    window.current_action = choose_action(window.counts, window.current_action)
    return window.current_action
