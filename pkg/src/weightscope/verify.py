"""Numerical certification of the DOCS invariances, the Hadamard-pair bound and the
orthogonal-matrix behaviour of every index."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from . import rng as _rng
from .errors import ArgError
from .simcore import IndexKind, IndexParams, compute_index, docs, hadamard


class Classification(str, Enum):
    CONSTANT = "Constant"
    DIMENSION_DEPENDENT = "DimensionDependent"
    DISCRIMINATIVE = "Discriminative"
    HOLDS = "Holds"
    FAILS = "Fails"


# Expected behaviour of each index on random orthogonal pairs. The DOCS_MEAN
# entry is our own expectation for the mean-aggregation ablation.
EXPECTED_BEHAVIOUR = {
    IndexKind.LINREG: Classification.CONSTANT,
    IndexKind.CCA_R2: Classification.CONSTANT,
    IndexKind.CCA_NUCLEAR: Classification.CONSTANT,
    IndexKind.SVCCA_R2: Classification.CONSTANT,
    IndexKind.SVCCA_NUCLEAR: Classification.CONSTANT,
    IndexKind.LINEAR_HSIC: Classification.DIMENSION_DEPENDENT,
    IndexKind.LINEAR_CKA: Classification.CONSTANT,
    IndexKind.DOCS: Classification.DISCRIMINATIVE,
    IndexKind.DOCS_MEAN: Classification.DISCRIMINATIVE,
}

CONSTANCY_TOL = 1e-6
DISCRIMINATIVE_FLOOR = 1e-3
PT_TOL = 1e-12
SYMMETRY_TOL = 1e-9
IS_TOL = 1e-9
HADAMARD_FROB_TOL = 1e-9  # relative
HADAMARD_DOCS_TOL = 1e-12

DEFAULT_M_VALUES = (2, 4, 8, 16, 64, 256)
DEFAULT_N_VALUES = (4, 16, 64, 256)

# Orthogonal 3x3 pairs with their reported DOCS values (to two decimals).
WITNESS_PAIRS = (
    (np.array([[-0.6676, 0.5171, -0.5357],
               [-0.7310, -0.5917, 0.3399],
               [-0.1412, 0.6185, 0.7730]]),
     np.array([[-0.1837, 0.5950, 0.7825],
               [0.0457, -0.7900, 0.6114],
               [0.9819, 0.1481, 0.1179]]),
     0.88),
    (np.array([[-0.8499, 0.0164, 0.5267],
               [-0.0816, -0.9915, -0.1009],
               [0.5206, -0.1287, 0.8440]]),
     np.array([[-0.7028, -0.6446, -0.3009],
               [0.3734, -0.6943, 0.6153],
               [-0.6056, 0.3200, 0.7286]]),
     0.76),
)
WITNESS_TOL = 0.01


@dataclass(frozen=True)
class PropertyReport:
    property: str
    kind: IndexKind
    trials: int
    max_deviation: float
    classification: Classification
    seed: int

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["kind"] = self.kind.value
        doc["classification"] = self.classification.value
        return doc


def hadamard_pair(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Standard basis X and normalised Hadamard Y, both m x m."""
    return np.eye(m), hadamard(m) / math.sqrt(m)


def verify_hadamard_pair(m_values=DEFAULT_M_VALUES) -> PropertyReport:
    """Check ||X - Y||_F^2 = 2m and DOCS(X, Y) = 1/sqrt(m) for each m."""
    worst = 0.0
    holds = True
    for m in m_values:
        if m < 2 or m & (m - 1):
            raise ArgError(f"m must be a power of two >= 2, got {m}")
        x, y = hadamard_pair(m)
        frob_dev = abs(np.sum((x - y) ** 2) - 2 * m) / (2 * m)
        score = docs(x, y)
        docs_dev = abs(score.value - 1.0 / math.sqrt(m))
        degenerate = score.meta["fit_x"].degenerate and score.meta["fit_y"].degenerate
        holds &= frob_dev <= HADAMARD_FROB_TOL and docs_dev <= HADAMARD_DOCS_TOL and degenerate
        worst = max(worst, frob_dev, docs_dev)
    cls = Classification.HOLDS if holds else Classification.FAILS
    return PropertyReport("Theorem1", IndexKind.DOCS, len(m_values), float(worst), cls, 0)


def classify_orthogonal(values_by_n: dict[int, np.ndarray]) -> tuple[Classification, float, float]:
    """Classify sampled index values; returns (class, within-n spread, cross-n spread).

    Within-n spread is the largest sample standard deviation among the n
    groups; cross-n spread is the range of the group means.
    """
    within = max(float(np.std(v, ddof=1)) for v in values_by_n.values())
    means = [float(np.mean(v)) for v in values_by_n.values()]
    cross = max(means) - min(means)
    if within > DISCRIMINATIVE_FLOOR:
        return Classification.DISCRIMINATIVE, within, cross
    if within > CONSTANCY_TOL:
        return Classification.FAILS, within, cross
    if cross <= CONSTANCY_TOL:
        return Classification.CONSTANT, within, cross
    return Classification.DIMENSION_DEPENDENT, within, cross


def orthogonal_samples(kind: IndexKind, n_values=DEFAULT_N_VALUES, trials_per_n: int = 50,
                       seed: int = 0, svcca_threshold: float = 1.0) -> dict[int, np.ndarray]:
    """Index values on random orthogonal pairs, keyed by dimension."""
    params = IndexParams(svcca_threshold=svcca_threshold)
    rng = _rng.generator(seed)
    out = {}
    for n in n_values:
        vals = []
        for _ in range(trials_per_n):
            x = _rng.random_orthogonal(rng, n)
            y = _rng.random_orthogonal(rng, n)
            vals.append(compute_index(kind, x, y, params).value)
        out[n] = np.array(vals)
    return out


def verify_orthogonal_behavior(kind: IndexKind, n_values=DEFAULT_N_VALUES,
                               trials_per_n: int = 50, seed: int = 0,
                               svcca_threshold: float = 1.0) -> PropertyReport:
    if trials_per_n < 2:
        raise ArgError("trials_per_n must be at least 2")
    kind = IndexKind(kind)
    samples = orthogonal_samples(kind, n_values, trials_per_n, seed, svcca_threshold)
    cls, within, _ = classify_orthogonal(samples)
    return PropertyReport("OrthogonalBehavior", kind, trials_per_n * len(n_values),
                          within, cls, seed)


def _random_pair(rng, max_dim: int):
    n = int(rng.integers(2, max_dim + 1))
    m = int(rng.integers(2, max_dim + 1))
    return _rng.normal(rng, (n, m)), _rng.normal(rng, (n, m))


def verify_docs_properties(trials: int = 100, seed: int = 42, max_dim: int = 64,
                           pairs=None) -> list[PropertyReport]:
    """Permutation, symmetry, scaling and reflexivity checks plus the 3x3 witness.

    ``pairs`` replaces the random draws with explicit (X, Y) matrices.
    """
    if trials < 1:
        raise ArgError("trials must be at least 1")
    rng = _rng.generator(seed)
    dev = {"PT": 0.0, "Symmetry": 0.0, "IS": 0.0, "Reflexivity": 0.0}
    pairs = list(pairs) if pairs is not None else [_random_pair(rng, max_dim)
                                                   for _ in range(trials)]
    for x, y in pairs:
        base = docs(x, y).value
        px = rng.permutation(x.shape[1])
        py = rng.permutation(y.shape[1])
        a, b = (float(rng.choice([-1.0, 1.0]) * 10.0 ** rng.uniform(-6, 6)) for _ in range(2))
        dev["PT"] = max(dev["PT"], abs(docs(x[:, px], y[:, py]).value - base))
        dev["Symmetry"] = max(dev["Symmetry"], abs(docs(y, x).value - base))
        dev["IS"] = max(dev["IS"], abs(docs(a * x, b * y).value - base))
        dev["Reflexivity"] = max(dev["Reflexivity"], abs(docs(x, x).value - 1.0))

    tolerances = {"PT": PT_TOL, "Symmetry": SYMMETRY_TOL, "IS": IS_TOL, "Reflexivity": 0.0}
    reports = [
        PropertyReport(prop, IndexKind.DOCS, len(pairs), dev[prop],
                       Classification.HOLDS if dev[prop] <= tolerances[prop]
                       else Classification.FAILS, seed)
        for prop in tolerances
    ]
    reports.append(verify_witness())
    return reports


def witness_values() -> list[float]:
    return [docs(x, y).value for x, y, _ in WITNESS_PAIRS]


def verify_witness() -> PropertyReport:
    """Two orthogonal 3x3 pairs whose DOCS values differ."""
    values = witness_values()
    deviation = max(abs(v - ref) for v, (_, _, ref) in zip(values, WITNESS_PAIRS))
    distinct = abs(values[0] - values[1]) > DISCRIMINATIVE_FLOOR
    cls = (Classification.DISCRIMINATIVE if distinct and deviation <= WITNESS_TOL
           else Classification.FAILS)
    return PropertyReport("OrthogonalBehavior", IndexKind.DOCS, len(values), deviation, cls, 0)


@dataclass
class SuiteResult:
    reports: list[PropertyReport]
    behaviour_match: bool
    all_hold: bool

    @property
    def passed(self) -> bool:
        return self.behaviour_match and self.all_hold

    def to_json(self) -> dict:
        return {
            "reports": [r.to_json() for r in self.reports],
            "behaviour_match": self.behaviour_match,
            "all_hold": self.all_hold,
        }


def run_suite(seed: int = 42, docs_trials: int = 100, trials_per_n: int = 50,
              n_values=DEFAULT_N_VALUES, m_values=DEFAULT_M_VALUES, kinds=None,
              progress=None) -> SuiteResult:
    """The full verification suite.

    Orthogonal behaviour is sampled for every index kind with SVCCA kept at
    full rank (threshold 1.0) and compared with ``EXPECTED_BEHAVIOUR``.
    """
    checks = [verify_hadamard_pair(m_values)]
    checks += verify_docs_properties(docs_trials, seed)
    behaviour = []
    for kind in kinds or list(IndexKind):
        if progress:
            progress(f"orthogonal behaviour: {kind.value}")
        behaviour.append(verify_orthogonal_behavior(kind, n_values, trials_per_n, seed, 1.0))
    behaviour_match = all(r.classification is EXPECTED_BEHAVIOUR[r.kind] for r in behaviour)
    all_hold = all(r.classification is not Classification.FAILS for r in checks)
    return SuiteResult(checks + behaviour, behaviour_match, all_hold)
