"""Seed-derived random substreams.

Every stochastic entry point derives independent Philox substreams from
(seed, domain, index...) so that resamples, replicates, and simulated
subjects can run in any order, serially or in parallel, and still
produce bit-identical results for a fixed seed.
"""

import numpy as np

# Domain tags keep substreams from distinct stages disjoint.
DOMAIN_FIT = 0
DOMAIN_RESAMPLE = 1
DOMAIN_SIM = 2
DOMAIN_STUDY = 3
DOMAIN_RAIN = 4


def substream(seed, *key):
    """Counter-based generator for the substream (seed, *key)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *key):
    """64-bit child seed for handing to a nested seeded entry point."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
