"""Full-database holistic ranking and top-K candidate filtering."""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Tuple

import numpy as np

from c2f_retrieval.holistic.histogram import HsvHistogram, HistogramError, cosine_scores
from c2f_retrieval.logging import get_logger


class ParameterError(ValueError):
    """Raised for out-of-range pipeline parameters (K <= 0, unknown mode)."""


@dataclass(frozen=True)
class HolisticScoreList:
    """
    Database images ranked by holistic score ``s^G``.

    Scores are non-increasing; equal scores are ordered by ascending image id.
    """

    image_ids: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.image_ids, dtype=np.int64).reshape(-1)
        scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        if ids.size != scores.size:
            raise HistogramError("image_ids and scores must have the same length")
        ids.setflags(write=False)
        scores.setflags(write=False)
        object.__setattr__(self, "image_ids", ids)
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return int(self.image_ids.size)

    @property
    def entries(self) -> List[Tuple[int, float]]:
        return [(int(i), float(s)) for i, s in zip(self.image_ids, self.scores)]

    def as_dict(self) -> Dict[int, float]:
        return dict(self.entries)


def order_by_score(image_ids: np.ndarray, scores: np.ndarray) -> HolisticScoreList:
    """Sort by descending score, ties by ascending image id."""
    image_ids = np.asarray(image_ids, dtype=np.int64)
    scores = np.asarray(scores, dtype=np.float64)
    order = np.lexsort((image_ids, -scores))
    return HolisticScoreList(image_ids=image_ids[order], scores=scores[order])


def rank_database(
    q: HsvHistogram,
    db: Mapping[int, HsvHistogram],
) -> HolisticScoreList:
    """
    Score every database histogram against the query and rank them.

    Parameters
    ----------
    q : HsvHistogram
        Normalised query histogram.
    db : Mapping[int, HsvHistogram]
        Normalised database histograms keyed by image id.

    Returns
    -------
    HolisticScoreList
        All N images, best first.
    """
    if not db:
        raise HistogramError("cannot rank against an empty database")
    image_ids = np.array(sorted(db), dtype=np.int64)
    for image_id in image_ids:
        if db[int(image_id)].size != q.size:
            raise HistogramError(
                f"image {int(image_id)} has P={db[int(image_id)].size}, query P={q.size}"
            )
    matrix = np.stack([db[int(i)].bins for i in image_ids])
    return order_by_score(image_ids, cosine_scores(matrix, q.bins))


def filter_top_k(scores: HolisticScoreList, k: int, logger=None) -> HolisticScoreList:
    """Keep the first ``min(k, N)`` entries of a ranking."""
    if k <= 0:
        raise ParameterError(f"candidate count K must be >= 1, got {k}")
    if k > len(scores):
        logger = logger or get_logger("holistic-filter")
        logger.warning(f"K={k} exceeds database size {len(scores)}; clamped.")
    return HolisticScoreList(
        image_ids=scores.image_ids[:k],
        scores=scores.scores[:k],
    )
