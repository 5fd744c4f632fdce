"""weightscope: similarity analysis of neural-network weight matrices.

The core index is DOCS (distribution of cosine similarity), with linear
regression, CCA, SVCCA, linear HSIC and linear CKA as baselines.
"""

__version__ = "0.1.0"

from .errors import WeightscopeError  # noqa: E402
from .simcore import IndexKind, IndexParams, compute_index  # noqa: E402
from .simcore.docs import docs  # noqa: E402

__all__ = ["IndexKind", "IndexParams", "WeightscopeError", "compute_index", "docs", "__version__"]
