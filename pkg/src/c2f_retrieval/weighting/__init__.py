from c2f_retrieval.weighting.adaptive import (
    WeightedCandidateSet,
    WeightingError,
    make_weights,
    min_max_normalize,
    uniform_weights,
)

__all__ = [
    "WeightedCandidateSet",
    "WeightingError",
    "make_weights",
    "min_max_normalize",
    "uniform_weights",
]
