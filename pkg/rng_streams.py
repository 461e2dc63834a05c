import numpy as np

# Purpose codes keep streams for different draws apart even at equal (round, actor).
SEED_GRAPH = 1
PROFILES = 2
ACTIVATION = 3
ACTOR = 4
METRICS = 5
BASELINE = 6


def derive_rng(master_seed, *keys):
    """Counter-based stream: the same (seed, keys) always yields the same generator,
    whatever thread or order asks for it."""
    entropy = [int(master_seed)] + [int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
