"""Seed derivation and counter-addressable uniform streams.

Every random quantity in the package comes from a stream keyed by
``(seed, *key)`` through :class:`numpy.random.SeedSequence`, so results do
not depend on the order in which replications or monitoring steps are
evaluated.

The randomised statistic needs one block of ``R`` standard normals per
monitoring step.  Those are produced by inverse transform from a Philox
counter stream: step ``k`` owns raw words ``[(k-1)*B, (k-1)*B + R)`` with
``B = 4*ceil(R/4)``, so a single step can be regenerated with
:meth:`Philox.advance` without touching the others.
"""
from __future__ import annotations

import numpy as np

ROLES = {"dgp-x": 0, "dgp-e": 1, "randomizer": 2, "critvals": 3}

_TWO_M52 = 1.0 / 4503599627370496.0


def _spawn_key(key) -> tuple[int, ...]:
    out = []
    for part in key:
        if isinstance(part, str):
            part = ROLES[part]
        out.append(int(part))
    return tuple(out)


def seed_sequence(seed: int, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=_spawn_key(key))


def generator(seed: int, *key) -> np.random.Generator:
    """PCG64 generator for the named substream."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *key)))


def philox_key(seed: int, *key) -> np.ndarray:
    return seed_sequence(seed, *key).generate_state(2, np.uint64)


def block_width(R: int) -> int:
    return 4 * ((R + 3) // 4)


def raw_block(key: np.ndarray, k_first: int, n_steps: int, R: int) -> np.ndarray:
    """Raw 64-bit words for steps ``k_first .. k_first + n_steps - 1`` (1-based).

    Returns an ``(n_steps, block_width(R))`` array; only the first ``R``
    columns of each row are used.
    """
    if k_first < 1:
        raise ValueError("monitoring steps are numbered from 1")
    B = block_width(R)
    bg = np.random.Philox(key=key)
    if k_first > 1:
        bg.advance((k_first - 1) * (B // 4))
    return bg.random_raw(n_steps * B).reshape(n_steps, B)


def raw_to_uniform(raw: np.ndarray) -> np.ndarray:
    """Map raw words to midpoint uniforms in the open interval (0, 1).

    52 bits are kept so that the top midpoint, ``1 - 2**-53``, is representable.
    """
    return ((raw >> np.uint64(12)).astype(np.float64) + 0.5) * _TWO_M52


def normal_block(key: np.ndarray, k: int, R: int) -> np.ndarray:
    """The ``R`` Gaussian draws of step ``k`` (diagnostic use)."""
    from scipy.special import ndtri

    return ndtri(raw_to_uniform(raw_block(key, k, 1, R)[0, :R]))
