"""Reproducible random streams for Monte Carlo repetitions."""

import numpy as np


def repetition_rng(seed, *keys):
    """Counter-based generator derived from (seed, *keys).

    Each (seed, keys) tuple maps to an independent Philox stream, so
    repetitions can run in any order or on any thread.
    """
    entropy = [int(seed)] + [int(key) for key in keys]
    if any(value < 0 for value in entropy):
        raise ValueError(f"seed and stream keys must be nonnegative, got {entropy}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
