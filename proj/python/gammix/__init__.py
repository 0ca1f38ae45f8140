"""Shifted-gamma mixture fitting for similarity scores.

Thin Python surface over the C++ core: distribution objects, the ECM
fitter, the hierarchy simulator, and match-significance helpers.
"""

from ._core import (
    FitConfig,
    FitReport,
    GammaMixture,
    HierarchyConfig,
    LabeledSimilarities,
    Match,
    MatchResult,
    ShiftedGamma,
    VmfCosine,
    best_matches,
    bic,
    combine_p_values,
    cosine_similarities,
    fit,
    level_histogram,
    mean,
    p_value,
    sf,
    simulate,
    skewness,
    variance,
)

__version__ = "0.1.0"

__all__ = [
    "FitConfig",
    "FitReport",
    "GammaMixture",
    "HierarchyConfig",
    "LabeledSimilarities",
    "Match",
    "MatchResult",
    "ShiftedGamma",
    "VmfCosine",
    "best_matches",
    "bic",
    "combine_p_values",
    "cosine_similarities",
    "fit",
    "level_histogram",
    "mean",
    "p_value",
    "sf",
    "simulate",
    "skewness",
    "variance",
]
