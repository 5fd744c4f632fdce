"""Seeded random streams shared by fixtures, verification and M_theta.

The generator is Philox4x64-10 (numpy's ``Philox``) keyed directly with the
64-bit seed, counter starting at zero. Uniform doubles are drawn with
``Generator.random`` (top 53 bits of each 64-bit output, scaled by 2**-53).
Gaussians use the basic Box-Muller transform on consecutive uniform pairs::

    z[2k]   = sqrt(-2 ln(1 - u[2k])) * cos(2 pi u[2k+1])
    z[2k+1] = sqrt(-2 ln(1 - u[2k])) * sin(2 pi u[2k+1])

Output is filled in C order, so the stream is reproducible from this
description alone.
"""

from __future__ import annotations

import numpy as np


def generator(seed: int) -> np.random.Generator:
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed))


def normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normal draws via Box-Muller, in C order."""
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    count = int(np.prod(shape, dtype=np.int64))
    pairs = (count + 1) // 2
    u = rng.random(2 * pairs)
    radius = np.sqrt(-2.0 * np.log1p(-u[0::2]))
    angle = 2.0 * np.pi * u[1::2]
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:count].reshape(shape)


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    """QR of a Gaussian matrix with R's diagonal signs folded into Q."""
    q, r = np.linalg.qr(normal(rng, (n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs
