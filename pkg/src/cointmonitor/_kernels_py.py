"""Pure numpy versions of the compiled kernels (same outputs, bit-for-bit)."""
from __future__ import annotations

import numpy as np

from ._rng import raw_to_uniform

_CHUNK_VALUES = 2_000_000


def theta_counts(raw: np.ndarray, R: int, probs: np.ndarray) -> np.ndarray:
    u = raw_to_uniform(np.asarray(raw)[:, :R])
    probs = np.asarray(probs, dtype=np.float64)
    return (u[:, :, None] <= probs[:, None, :]).sum(axis=1, dtype=np.int64)


def brownian_sup(bit_generator, n_paths: int, weights: np.ndarray, step_sd: float) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64)
    grid = weights.shape[0]
    gen = np.random.Generator(bit_generator)
    out = np.empty(n_paths)
    chunk = max(1, _CHUNK_VALUES // grid)
    for start in range(0, n_paths, chunk):
        stop = min(n_paths, start + chunk)
        z = gen.standard_normal((stop - start, grid))
        z *= step_sd
        np.cumsum(z, axis=1, out=z)
        np.abs(z, out=z)
        z *= weights
        out[start:stop] = z.max(axis=1)
    return out
