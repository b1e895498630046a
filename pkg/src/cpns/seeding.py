"""Derived random streams.

All randomness flows from a master seed plus integer keys such as
(source, run) or (fraction index, draw). Keys are mixed with numpy's
SeedSequence hash, so streams for different keys are independent and a
run's stream does not depend on how work is split across workers.
"""

import numpy as np


def run_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *map(int, keys)])


def derive_seed(seed: int, *keys: int) -> int:
    """A 64-bit seed for ``(seed, *keys)``."""
    return int(np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(1, np.uint64)[0])
