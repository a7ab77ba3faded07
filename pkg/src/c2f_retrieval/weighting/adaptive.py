"""Adaptive candidate weights derived from holistic scores."""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from c2f_retrieval.holistic.ranking import HolisticScoreList
from c2f_retrieval.logging import get_logger


class WeightingError(ValueError):
    """Raised when weights cannot be derived (empty candidate list)."""


@dataclass(frozen=True)
class WeightedCandidateSet:
    """
    The K surviving candidates with their holistic scores and weights.

    Entries keep the holistic order (descending ``s^G``); weights are
    non-negative and sum to one.
    """

    query_id: Optional[int]
    image_ids: np.ndarray
    scores: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.image_ids, dtype=np.int64).reshape(-1)
        scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if not ids.size == scores.size == weights.size:
            raise WeightingError("ids, scores and weights must have equal length")
        if np.any(weights < 0):
            raise WeightingError("weights must be non-negative")
        for array in (ids, scores, weights):
            array.setflags(write=False)
        object.__setattr__(self, "image_ids", ids)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return int(self.image_ids.size)

    @property
    def entries(self) -> List[Tuple[int, float, float]]:
        return [
            (int(i), float(s), float(w))
            for i, s, w in zip(self.image_ids, self.scores, self.weights)
        ]

    def weight_of(self, image_id: int) -> float:
        hits = np.flatnonzero(self.image_ids == image_id)
        if hits.size == 0:
            raise KeyError(image_id)
        return float(self.weights[hits[0]])


def min_max_normalize(scores: Sequence[float]) -> List[float]:
    """
    Rescale scores to [0, 1]: the maximum maps to 1 and the minimum to 0.

    When every score is equal the ratio is 0/0; each entry then gets 1/K.
    """
    values = np.asarray(scores, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise WeightingError("cannot normalise an empty score list")
    low, high = float(values.min()), float(values.max())
    if high == low:
        return [1.0 / values.size] * values.size
    return ((values - low) / (high - low)).tolist()


def make_weights(
    candidates: HolisticScoreList,
    query_id: Optional[int] = None,
    logger=None,
) -> WeightedCandidateSet:
    """
    Turn the K candidate scores into adaptive weights.

    Scores are min-max normalised and then divided by their sum, so the
    best candidate weighs most and the weakest one gets weight 0.

    Parameters
    ----------
    candidates : HolisticScoreList
        The ranking already truncated to K.
    query_id : int, optional
        Carried through for reports.
    logger :
        Optional Loguru logger instance.

    Returns
    -------
    WeightedCandidateSet
    """
    if len(candidates) == 0:
        raise WeightingError("at least one candidate is required")
    scores = candidates.scores
    normalized = np.asarray(min_max_normalize(scores), dtype=np.float64)
    if len(candidates) > 1 and scores.max() == scores.min():
        logger = logger or get_logger("adaptive-weights")
        logger.warning(
            f"All {len(candidates)} candidate scores are equal, uniform weights used."
        )
    weights = normalized / normalized.sum()
    return WeightedCandidateSet(
        query_id=query_id,
        image_ids=candidates.image_ids,
        scores=scores,
        weights=weights,
    )


def uniform_weights(
    candidates: HolisticScoreList,
    query_id: Optional[int] = None,
) -> WeightedCandidateSet:
    """Equal weights 1/K: the filter-only setting without adaptive weights."""
    if len(candidates) == 0:
        raise WeightingError("at least one candidate is required")
    size = len(candidates)
    return WeightedCandidateSet(
        query_id=query_id,
        image_ids=candidates.image_ids,
        scores=candidates.scores,
        weights=np.full(size, 1.0 / size),
    )
