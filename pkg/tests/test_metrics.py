import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from c2f_retrieval.evaluation import (
    EvaluationError,
    GroundTruth,
    average_precision,
    evaluate,
    mean_ap,
    ns_score,
    read_ground_truth,
    write_ground_truth,
)


def _interpolated_area(ranking, positives):
    """Precision-recall area by summing precision at each recall step."""
    area, previous_recall, hits = 0.0, 0.0, 0
    for rank, image_id in enumerate(ranking, start=1):
        if image_id in positives:
            hits += 1
            recall = hits / len(positives)
            area += (recall - previous_recall) * hits / rank
            previous_recall = recall
    return area


def test_single_positive_at_rank_two():
    assert average_precision([5, 7, 9], {7}) == pytest.approx(0.5)


def test_two_positives_at_ranks_one_and_three():
    assert average_precision([1, 2, 3, 4], {1, 3}) == pytest.approx((1 + 2 / 3) / 2)


def test_missing_positive_counts_as_zero():
    assert average_precision([1, 2], {1, 99}) == pytest.approx(0.5)


def test_perfect_ranking_scores_one():
    assert average_precision([3, 1, 2, 0], {1, 3}) == pytest.approx(1.0)


def test_average_precision_matches_precision_recall_area():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(1, 30))
        ranking = rng.permutation(n).tolist()
        positives = set(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False).tolist())
        assert average_precision(ranking, positives) == pytest.approx(_interpolated_area(ranking, positives), abs=1e-9)


@settings(max_examples=500, deadline=None)
@given(st.lists(st.booleans(), min_size=2, max_size=40), st.data())
def test_moving_a_positive_up_one_rank_raises_ap(relevant, data):
    swappable = [i for i in range(1, len(relevant)) if relevant[i] and not relevant[i - 1]]
    assume(swappable)
    i = data.draw(st.sampled_from(swappable))
    ranking = list(range(len(relevant)))
    positives = {r for r, hit in zip(ranking, relevant) if hit}
    improved = ranking.copy()
    improved[i - 1], improved[i] = improved[i], improved[i - 1]

    assert average_precision(improved, positives) > average_precision(ranking, positives)


def test_empty_positive_set_is_rejected():
    with pytest.raises(EvaluationError):
        average_precision([1, 2], set())


def test_holidays_protocol_drops_the_query_from_its_ranking():
    gt = GroundTruth({0: {0, 1}}, protocol="holidays")

    assert gt[0] == {1}
    assert mean_ap({0: [0, 1, 2]}, gt) == pytest.approx(1.0)


def test_ukbench_protocol_counts_the_query_itself():
    gt = GroundTruth.from_groups([[0, 1, 2, 3]], protocol="ukbench-like")

    rankings = {q: [q] + [i for i in range(8) if i != q] for q in range(4)}

    assert gt[2] == {0, 1, 2, 3}
    assert ns_score(rankings, gt) == pytest.approx(4.0)


def test_ns_score_counts_top_four():
    gt = GroundTruth.from_groups([[0, 1, 2, 3]], protocol="ukbench")
    rankings = {q: [q, 9, 1, 8, 2, 3, 0] for q in range(4)}

    scores = [len({q, 9, 1, 8} & {0, 1, 2, 3}) for q in range(4)]

    assert ns_score(rankings, gt) == pytest.approx(np.mean(scores))


def test_ns_score_needs_groups_of_four():
    gt = GroundTruth.from_groups([[0, 1, 2]], protocol="ukbench")

    with pytest.raises(EvaluationError):
        ns_score({q: [0, 1, 2] for q in range(3)}, gt)


def test_evaluate_reports_ns_only_under_ukbench():
    holidays = GroundTruth.from_groups([[0, 1]], protocol="holidays")
    ukbench = GroundTruth.from_groups([[0, 1, 2, 3]], protocol="ukbench")

    assert set(evaluate({0: [0, 1]}, holidays)) == {"mAP"}
    assert set(evaluate({q: [0, 1, 2, 3] for q in range(4)}, ukbench)) == {"mAP", "N-S"}


def test_mean_ap_averages_queries():
    gt = GroundTruth({0: {1}, 2: {3}}, protocol="holidays")

    assert mean_ap({0: [1, 3], 2: [1, 3]}, gt) == pytest.approx((1.0 + 0.5) / 2)


def test_missing_ranking_is_rejected():
    with pytest.raises(EvaluationError):
        mean_ap({}, GroundTruth({0: {1}}))


def test_ids_outside_the_corpus_are_rejected():
    with pytest.raises(EvaluationError):
        GroundTruth({0: {5}}).validate_ids(3)


def test_unknown_protocol_is_rejected():
    with pytest.raises(EvaluationError):
        GroundTruth({0: {1}}, protocol="oxford")


def test_query_with_only_itself_is_rejected_under_holidays():
    with pytest.raises(EvaluationError):
        GroundTruth({0: {0}}, protocol="holidays")


def test_ground_truth_file_round_trip(tmp_path):
    gt = GroundTruth.from_groups([[0, 1, 2], [3, 4]], protocol="holidays")

    loaded = read_ground_truth(write_ground_truth(gt, tmp_path / "gt.txt"))

    assert loaded == gt
    assert (tmp_path / "gt.txt").read_text() == "0: 1 2\n3: 4\n"


@pytest.mark.parametrize("content", ["0 1 2\n", "x: 1\n", "0: 1\n0: 2\n", "0: a\n"])
def test_malformed_ground_truth_is_rejected(tmp_path, content):
    path = tmp_path / "gt.txt"
    path.write_text(content)

    with pytest.raises(EvaluationError):
        read_ground_truth(path)


def test_ap_is_permutation_sensitive_only_through_positive_ranks():
    positives = {2, 4}
    for ranking in itertools.permutations(range(5)):
        ranks = sorted(ranking.index(p) + 1 for p in positives)
        expected = (1 / ranks[0] + 2 / ranks[1]) / 2
        assert average_precision(ranking, positives) == pytest.approx(expected)
