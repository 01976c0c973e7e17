"""Small shared helpers: RNG coercion and CSV float formatting."""

import numpy as np


def ensure_rng(rng) -> np.random.Generator:
    """Accept a Generator, a seed (int or sequence of ints), or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def fmt12(x) -> str:
    """Serialize a float with 12 significant digits, trailing zeros trimmed."""
    return format(float(x), ".12g")
