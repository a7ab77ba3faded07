import math

import numpy as np
import pytest

from c2f_retrieval.evaluation import evaluate
from c2f_retrieval.index import LocalScoreMap
from c2f_retrieval.pipeline import c2f_pipeline
from c2f_retrieval.pipeline import (
    FusionError,
    ParameterError,
    PipelineConfig,
    build_pipeline,
    encode_query,
    fuse_scores,
)
from c2f_retrieval.synthgen import SynthSpec, generate
from c2f_retrieval.validation import StoreValidationError
from c2f_retrieval.weighting import WeightedCandidateSet
from tests.conftest import small_engine_config


def _weights(ids, scores, weights):
    return WeightedCandidateSet(query_id=None, image_ids=ids, scores=scores, weights=weights)


def _rankings(pipeline, gt):
    return {r.query_id: r.image_ids() for r in pipeline.run_batch(gt.queries, full_depth=True)}


def test_fusion_lets_weights_flip_local_order():
    local = LocalScoreMap(scores={0: 2.0, 1: 1.0})
    weights = _weights([0, 1], [0.9, 0.8], [0.25, 0.75])

    entries = fuse_scores(local, weights)

    assert [e.image_id for e in entries] == [1, 0]
    assert [e.final for e in entries] == pytest.approx([0.75, 0.5])


def test_candidates_without_matches_fuse_to_zero_and_sort_by_holistic():
    local = LocalScoreMap(scores={2: 1.0})
    weights = _weights([0, 1, 2], [0.5, 0.9, 0.1], [0.2, 0.3, 0.5])

    entries = fuse_scores(local, weights)

    assert [e.image_id for e in entries] == [2, 1, 0]
    assert entries[1].final == 0.0 and entries[1].local == 0.0


def test_fusion_rejects_scores_outside_the_candidate_set():
    with pytest.raises(FusionError):
        fuse_scores(LocalScoreMap(scores={5: 1.0}), _weights([0], [1.0], [1.0]))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"K": 0},
        {"ma": 0},
        {"mode": "fine-only"},
        {"tf_mode": "bursty"},
        {"alpha": 0.0},
        {"h_t": 200},
        {"sigma": 0.0},
    ],
)
def test_invalid_pipeline_parameters_are_rejected(kwargs):
    with pytest.raises(ParameterError):
        PipelineConfig(**kwargs)


@pytest.mark.parametrize("changes", [{"d_b": 999}, {"k": 3}, {"hsv_dims": (4, 4, 4)}])
def test_run_config_must_describe_the_loaded_stores(perfect_pipeline, changes):
    with pytest.raises(StoreValidationError):
        perfect_pipeline.with_config(**changes)


def test_run_threshold_and_bandwidth_reach_local_scoring(perfect_pipeline, monkeypatch):
    seen = {}
    score = c2f_pipeline.score_candidates

    def recording_score(*args, **kwargs):
        seen.update(h_t=kwargs["h_t"], sigma=kwargs["sigma"])
        return score(*args, **kwargs)

    monkeypatch.setattr(c2f_pipeline, "score_candidates", recording_score)
    perfect_pipeline.with_config(h_t=3, sigma=1.5).run_query(query_id=0)

    assert seen == {"h_t": 3, "sigma": 1.5}


def test_query_histogram_uses_run_alpha(perfect_pipeline, perfect_corpus):
    image = perfect_corpus.images[2]

    stored = perfect_pipeline.histograms.histogram(2)
    computed = perfect_pipeline.query_histogram(image)
    linear = perfect_pipeline.with_config(alpha=1.0).query_histogram(image)

    np.testing.assert_allclose(computed.bins, stored.bins, atol=1e-6)
    np.testing.assert_allclose(linear.bins, stored.bins ** 2, atol=1e-6)


def test_perfect_corpus_is_retrieved_perfectly(perfect_pipeline, perfect_corpus):
    gt = perfect_corpus.ground_truth

    assert evaluate(_rankings(perfect_pipeline, gt), gt)["mAP"] == pytest.approx(1.0)


def test_perfect_corpus_reaches_full_ns_score(perfect_spec):
    spec = SynthSpec(n_groups=4, group_size=4, n_distractors=8, seed=perfect_spec.seed, protocol="ukbench-like")
    corpus = generate(spec)
    pipeline = build_pipeline(corpus.images, corpus.descriptors, small_engine_config(spec))
    gt = corpus.ground_truth

    metrics = evaluate(_rankings(pipeline, gt), gt)

    assert metrics["N-S"] == pytest.approx(4.0)
    assert metrics["mAP"] == pytest.approx(1.0)


def test_group_members_lead_the_ranking(perfect_pipeline, perfect_corpus):
    group = perfect_corpus.groups[1]

    ranking = perfect_pipeline.run_query(query_id=group[0]).image_ids()

    assert set(ranking[: len(group)]) == set(group)


def test_full_candidate_set_without_weights_equals_bag_of_words(perfect_pipeline):
    n = perfect_pipeline.n_images
    filtered = perfect_pipeline.with_config(K=n, weights_enabled=False, mode="c2f")
    bow = perfect_pipeline.with_config(mode="bow")

    for query_id in range(n):
        assert filtered.run_query(query_id=query_id).entries == bow.run_query(query_id=query_id).entries


def test_bow_mode_ignores_k(perfect_pipeline):
    bow = perfect_pipeline.with_config(mode="bow", K=2)

    result = bow.run_query(query_id=0)

    assert len(result) == perfect_pipeline.n_images
    assert result.candidates == perfect_pipeline.n_images


def test_holistic_mode_returns_holistic_order(perfect_pipeline):
    holistic = perfect_pipeline.with_config(mode="holistic", K=5)

    result = holistic.run_query(query_id=3)
    expected = perfect_pipeline.histograms.rank(perfect_pipeline.histograms.histogram(3)).entries[:5]

    assert [(e.image_id, e.final) for e in result.entries] == expected
    assert result.local_comparisons == 0
    assert result.comparison_count == perfect_pipeline.n_images


def test_k_beyond_database_size_is_clamped(perfect_pipeline):
    result = perfect_pipeline.with_config(K=10_000).run_query(query_id=0)

    assert len(result) == perfect_pipeline.n_images


def test_full_depth_appends_remaining_images_in_holistic_order(perfect_pipeline):
    result = perfect_pipeline.with_config(K=4).run_query(query_id=0, full_depth=True)
    finals = [e.final for e in result.entries]

    assert sorted(result.image_ids()) == list(range(perfect_pipeline.n_images))
    assert all(math.isfinite(f) for f in finals[:4])
    assert all(f == float("-inf") for f in finals[4:])
    tail = [e.holistic for e in result.entries[4:]]
    assert tail == sorted(tail, reverse=True)
    assert result.to_record()["entries"][-1]["final"] is None


def test_ranking_is_sorted_by_final_then_holistic_then_id(perfect_pipeline):
    entries = perfect_pipeline.run_query(query_id=5).entries
    keys = [(-e.final, -e.holistic, e.image_id) for e in entries]

    assert keys == sorted(keys)


def test_query_by_id_equals_query_by_stores(perfect_pipeline):
    by_id = perfect_pipeline.run_query(query_id=6)
    explicit = perfect_pipeline.run_query(
        histogram=perfect_pipeline.histograms.histogram(6),
        features=perfect_pipeline.query_features(6),
    )

    assert by_id.entries == explicit.entries


def test_descriptor_scale_does_not_change_ranking(perfect_pipeline):
    values = perfect_pipeline.descriptors.for_image(2)
    histogram = perfect_pipeline.histograms.histogram(2)
    config = perfect_pipeline.config

    base = encode_query(values, perfect_pipeline.codebook, perfect_pipeline.he, ma=config.ma)
    scaled = encode_query(4.0 * values, perfect_pipeline.codebook, perfect_pipeline.he, ma=config.ma)

    assert np.array_equal(base.words, scaled.words)
    assert np.array_equal(base.signatures, scaled.signatures)
    assert (
        perfect_pipeline.run_query(histogram=histogram, features=base).entries
        == perfect_pipeline.run_query(histogram=histogram, features=scaled).entries
    )


def test_multiple_assignment_repeats_each_descriptor(perfect_pipeline):
    values = perfect_pipeline.descriptors.for_image(0)

    batch = encode_query(values, perfect_pipeline.codebook, perfect_pipeline.he, ma=3)

    assert len(batch) == 3 * values.shape[0]
    assert np.all(batch.words[0::3] != batch.words[1::3])


def test_comparison_counts(perfect_pipeline):
    result = perfect_pipeline.run_query(query_id=0)

    assert result.holistic_comparisons == perfect_pipeline.n_images
    assert result.comparison_count == result.holistic_comparisons + result.local_comparisons
    assert result.local_comparisons > 0


def test_runs_are_deterministic(perfect_spec, perfect_corpus, perfect_pipeline):
    again = build_pipeline(perfect_corpus.images, perfect_corpus.descriptors, small_engine_config(perfect_spec))

    for query_id in range(perfect_pipeline.n_images):
        assert again.run_query(query_id=query_id) == perfect_pipeline.run_query(query_id=query_id)


def test_threaded_batch_keeps_order_and_results(perfect_pipeline):
    ids = list(range(perfect_pipeline.n_images))[::-1]

    serial = perfect_pipeline.run_batch(ids)
    threaded = perfect_pipeline.run_batch(ids, workers=4)

    assert [r.query_id for r in threaded] == ids
    assert threaded == serial


def test_unknown_query_id_is_rejected(perfect_pipeline):
    with pytest.raises(ParameterError, match="unknown query id"):
        perfect_pipeline.run_query(query_id=perfect_pipeline.n_images)


def test_query_without_histogram_is_rejected(perfect_pipeline):
    with pytest.raises(ParameterError):
        perfect_pipeline.run_query(features=perfect_pipeline.query_features(0))
