import numpy as np


def crandn(rng, *shape):
    """Circularly-symmetric complex normal samples with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def separated(mean_hi, se_hi, mean_lo, se_lo, k=2.0):
    """``mean_hi`` exceeds ``mean_lo`` by at least ``k`` combined standard errors."""
    return mean_hi - mean_lo >= k * np.hypot(se_hi, se_lo)
