"""Deterministic random number streams

Every random draw in pyvcr comes from a counter-based Philox generator
keyed by an explicit integer seed. Streams for individual records of a
generated test set are derived from the master seed and the record
index, so the outcome does not depend on the order or the thread in
which records are produced.
"""

import numpy as np

MAX_SEED = 2 ** 64 - 1


def check_seed(seed):
    """Validate a seed, returning it as a Python int"""
    if int(seed) != seed or not 0 <= seed <= MAX_SEED:
        raise ValueError("Seeds must be integers in [0, 2**64), got {}".format(seed))
    return int(seed)


def make_rng(seed):
    """A numpy Generator backed by Philox, keyed by seed

    Args:
        seed (int): Non-negative 64-bit integer

    Returns:
        np.random.Generator
    """
    return np.random.Generator(np.random.Philox(check_seed(seed)))


def derive_seeds(master_seed, index, count=1):
    """Derive independent 64-bit seeds for one record

    Args:
        master_seed (int): Seed of the whole run
        index (int): Record index, non-negative
        count (int): Number of seeds wanted

    Returns:
        list of int
    """
    sequence = np.random.SeedSequence([check_seed(master_seed), int(index)])
    return [int(value) for value in sequence.generate_state(count, dtype=np.uint64)]
