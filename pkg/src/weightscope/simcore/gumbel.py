"""Maximum-likelihood fit of the Gumbel (maximum) distribution."""

from __future__ import annotations

import math

import numpy as np

from ..errors import NonFiniteError
from .types import GumbelFit

DEGENERATE_STD = 1e-12
TOLERANCE = 1e-10
MAX_ITER = 200


def _weights(x: np.ndarray, beta: float) -> np.ndarray:
    # x is sorted ascending, so x[0] shifts every exponent to <= 0.
    return np.exp(-(x - x[0]) / beta)


def gumbel_fit_location(data, tol: float = TOLERANCE, max_iter: int = MAX_ITER) -> GumbelFit:
    """Fit location ``u`` and scale ``beta`` by maximum likelihood.

    The scale solves ``beta = mean(x) - sum(x w) / sum(w)`` with
    ``w = exp(-x / beta)``, iterated from the method-of-moments start
    ``std * sqrt(6) / pi``. Then ``u = -beta * log(mean(w))``. Samples whose
    standard deviation is below ``DEGENERATE_STD`` get ``u = mean``,
    ``beta = 0``. A fit that does not settle within ``max_iter`` steps is
    returned with ``converged=False``.
    """
    x = np.sort(np.asarray(data, dtype=np.float64).ravel())
    if x.size == 0:
        raise ValueError("cannot fit an empty sample")
    if not np.isfinite(x).all():
        raise NonFiniteError("Gumbel fit input contains NaN/Inf")
    mean = float(x.mean())
    std = float(x.std(ddof=1)) if x.size > 1 else 0.0
    if std < DEGENERATE_STD:
        return GumbelFit(mean, 0.0, 0, True, True)

    beta = std * math.sqrt(6.0) / math.pi
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = _weights(x, beta)
        new = mean - float(np.dot(x, w) / w.sum())
        step = abs(new - beta)
        beta = new
        if step <= tol * max(1.0, beta):
            converged = True
            break
    w = _weights(x, beta)
    u = float(x[0] - beta * math.log(w.mean()))
    # log-mean-exp bounds u by the sample range; clip rounding only
    u = min(max(u, float(x[0])), float(x[-1]))
    return GumbelFit(u, beta, it, converged, False)


def gumbel_pdf(x, location: float, scale: float) -> np.ndarray:
    """Density of the Gumbel (maximum) distribution."""
    z = (np.asarray(x, dtype=np.float64) - location) / scale
    return np.exp(-(z + np.exp(-z))) / scale
