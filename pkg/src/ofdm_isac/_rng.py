import numpy as np

# Independent streams derived from one integer seed. Keeping payload, noise
# and target phases on separate streams means adding a target never shifts
# the noise realisation seen by the others.
PAYLOAD = 0
NOISE = 1
PHASE = 2


def stream(seed: int, kind: int, *key: int) -> np.random.Generator:
    """Return a counter-based generator for one named stream of ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(kind, *key))
    return np.random.Generator(np.random.Philox(ss))
