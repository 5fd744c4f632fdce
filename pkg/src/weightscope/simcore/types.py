from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class IndexKind(str, Enum):
    DOCS = "DOCS"
    DOCS_MEAN = "DOCS_MEAN"
    LINREG = "LINREG"
    CCA_R2 = "CCA_R2"
    CCA_NUCLEAR = "CCA_NUCLEAR"
    SVCCA_R2 = "SVCCA_R2"
    SVCCA_NUCLEAR = "SVCCA_NUCLEAR"
    LINEAR_HSIC = "LINEAR_HSIC"
    LINEAR_CKA = "LINEAR_CKA"

    @classmethod
    def parse(cls, text: str) -> "IndexKind":
        key = text.strip().upper().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown index kind {text!r}; choose from "
                             f"{', '.join(k.value for k in cls)}") from None

    @property
    def symmetric(self) -> bool:
        return self not in (IndexKind.LINREG, IndexKind.LINEAR_HSIC)

    @property
    def reflexive(self) -> bool:
        return self not in (IndexKind.CCA_R2, IndexKind.LINEAR_HSIC, IndexKind.DOCS_MEAN)

    @property
    def bounded(self) -> bool:
        return self is not IndexKind.LINEAR_HSIC


# The eight indices compared side by side (DOCS_MEAN is an ablation).
COMPARED_KINDS = (
    IndexKind.LINREG, IndexKind.CCA_R2, IndexKind.CCA_NUCLEAR, IndexKind.SVCCA_R2,
    IndexKind.SVCCA_NUCLEAR, IndexKind.LINEAR_HSIC, IndexKind.LINEAR_CKA, IndexKind.DOCS,
)


@dataclass(frozen=True)
class CosineMaxVector:
    values: np.ndarray
    source_m: int


@dataclass(frozen=True)
class GumbelFit:
    location_u: float
    scale_beta: float
    iterations: int
    converged: bool
    degenerate: bool


@dataclass(frozen=True)
class SimilarityScore:
    kind: IndexKind
    value: float
    meta: dict = field(default_factory=dict, compare=False)

    def __float__(self) -> float:
        return self.value
