import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator; the same seed gives the same stream on every platform."""
    return np.random.Generator(np.random.Philox(int(seed)))
