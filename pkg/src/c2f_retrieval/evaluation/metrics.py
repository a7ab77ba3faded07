"""Average precision, mAP and the top-4 N-S score."""

from typing import Iterable, Mapping, Sequence, Set

import numpy as np

from c2f_retrieval.evaluation.ground_truth import EvaluationError, GroundTruth

NS_DEPTH = 4


def average_precision(ranking: Iterable[int], positives: Set[int]) -> float:
    """
    Area under the precision-recall curve of one ranking.

    Each positive found at rank r contributes ``hits_so_far / r``;
    positives missing from the ranking contribute 0.
    """
    positives = set(int(p) for p in positives)
    if not positives:
        raise EvaluationError("average precision needs at least one positive")
    hits = 0
    total = 0.0
    for rank, image_id in enumerate(ranking, start=1):
        if int(image_id) in positives:
            hits += 1
            total += hits / rank
    return total / len(positives)


def _rankings_for(rankings: Mapping[int, Sequence[int]], gt: GroundTruth):
    missing = [q for q in gt.queries if q not in rankings]
    if missing:
        raise EvaluationError(f"no ranking for queries {missing[:10]}")
    for query in gt.queries:
        yield query, gt.prepare_ranking(query, rankings[query])


def per_query_ap(rankings: Mapping[int, Sequence[int]], gt: GroundTruth) -> dict:
    return {query: average_precision(ranking, gt[query]) for query, ranking in _rankings_for(rankings, gt)}


def mean_ap(rankings: Mapping[int, Sequence[int]], gt: GroundTruth) -> float:
    """Arithmetic mean of the per-query average precisions."""
    if len(gt) == 0:
        raise EvaluationError("ground truth holds no query")
    return float(np.mean(list(per_query_ap(rankings, gt).values())))


def ns_score(rankings: Mapping[int, Sequence[int]], gt: GroundTruth) -> float:
    """Mean number of positives among the first four results (at most 4)."""
    if len(gt) == 0:
        raise EvaluationError("ground truth holds no query")
    wrong = [q for q in gt.queries if len(gt[q]) != NS_DEPTH]
    if wrong:
        raise EvaluationError(
            f"N-S score needs groups of {NS_DEPTH} positives; queries {wrong[:10]} differ"
        )
    counts = [
        len(set(ranking[:NS_DEPTH]) & gt[query]) for query, ranking in _rankings_for(rankings, gt)
    ]
    return float(np.mean(counts))


def evaluate(rankings: Mapping[int, Sequence[int]], gt: GroundTruth) -> dict:
    """mAP for every protocol, plus the N-S score under ``ukbench``."""
    result = {"mAP": mean_ap(rankings, gt)}
    if gt.protocol == "ukbench":
        result["N-S"] = ns_score(rankings, gt)
    return result
