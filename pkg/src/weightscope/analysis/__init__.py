from .heatmap import (RatioReport, RatioRow, SimilarityMatrix, cross_model_series,
                      expert_heatmap, layer_heatmap, pairwise_matrix, ratio_rows,
                      similarity_matrix, similarity_ratio)
from .ortho import make_m_theta, offdiag_avg_cos
from .stats import (BLOCK_SIZES, BlockProfile, DistanceProfile, block_profile,
                    distance_profile, gini, gini_coefficient, offdiag_rows)

__all__ = [
    "BLOCK_SIZES", "BlockProfile", "DistanceProfile", "RatioReport", "RatioRow",
    "SimilarityMatrix", "block_profile", "cross_model_series", "distance_profile",
    "expert_heatmap", "gini", "gini_coefficient", "layer_heatmap", "make_m_theta",
    "offdiag_avg_cos", "offdiag_rows", "pairwise_matrix", "ratio_rows",
    "similarity_matrix", "similarity_ratio",
]
