"""Fact-checked story analysis toolkit.

Thin wrapper over the native module: text preprocessing, validity
harmonization, PCA + k-means with elbow selection, F1 evaluation,
nearest-neighbor story typing and random baselines.
"""

from ._factline import (
    FactlineError,
    KmeansModel,
    PcaModel,
    __version__,
    classify_nn_type,
    cosine_similarity,
    evaluate_f1,
    harmonize_validity,
    kmeans_fit,
    mode_validity,
    pca_fit,
    porter_stem,
    preprocess,
    random_baseline,
    select_k_elbow,
    wss_curve,
)

__all__ = [
    "FactlineError",
    "KmeansModel",
    "PcaModel",
    "__version__",
    "classify_nn_type",
    "cosine_similarity",
    "evaluate_f1",
    "harmonize_validity",
    "kmeans_fit",
    "mode_validity",
    "pca_fit",
    "porter_stem",
    "preprocess",
    "random_baseline",
    "select_k_elbow",
    "wss_curve",
]
