"""Counter-keyed random streams.

Every random draw in a run comes from a generator keyed on a tuple of integers
(master seed plus a purpose tag and counters), so a result never depends on the
order in which evaluations are scheduled.
"""

from __future__ import annotations

import numpy as np

# purpose tags, part of the key
SCHEDULE = 1
TRIAL = 2
REPRODUCTION = 3
INIT = 4


def stream(*key: int) -> np.random.Generator:
    """Philox generator for an integer key tuple."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


def derive_seed(*key: int) -> int:
    """A 63-bit integer seed derived from ``key``."""
    state = np.random.SeedSequence([int(k) for k in key]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def generation_seed(master_seed: int, generation: int) -> int:
    return derive_seed(master_seed, SCHEDULE, generation)


def trial_seed(master_seed: int, generation: int, genome_id: int, trial: int) -> int:
    return derive_seed(master_seed, TRIAL, generation, genome_id, trial)
