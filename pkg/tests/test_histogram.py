import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from c2f_retrieval.holistic import (
    HistogramError,
    HsvHistogram,
    ParameterError,
    PixelImage,
    cosine_score,
    filter_top_k,
    hsv_histogram,
    normalize_histogram,
    rank_database,
)


def _solid(rgb, count=1):
    return PixelImage(width=count, height=1, pixels=np.array([[rgb] * count], dtype=np.uint8))


def _flat(values):
    values = np.asarray(values, dtype=np.float64)
    return HsvHistogram(bins=values, dims=(values.size, 1, 1))


def test_black_pixels_land_in_first_bin():
    h = hsv_histogram(_solid((0, 0, 0), count=4))

    assert h.size == 1000
    assert h.bins[0] == 4
    assert h.bins.sum() == 4


def test_white_is_achromatic_top_value_bin():
    h = hsv_histogram(_solid((255, 255, 255)))

    # H bin 0, S bin 0, V bin 4
    assert np.flatnonzero(h.bins).tolist() == [4]


def test_pure_red_hits_top_saturation_and_value(red_image):
    h = hsv_histogram(red_image)

    # H bin 0, S bin 9, V bin 4
    assert np.flatnonzero(h.bins).tolist() == [9 * 5 + 4]


def test_histogram_mass_equals_pixel_count(checker_image):
    assert hsv_histogram(checker_image).bins.sum() == 16


@pytest.mark.parametrize(
    "raw, expected",
    [
        ([1, 0, 0], [1.0, 0.0, 0.0]),
        ([4, 4, 4, 4], [0.5, 0.5, 0.5, 0.5]),
        ([9, 16], [0.6, 0.8]),
    ],
)
def test_normalize_histogram_examples(raw, expected):
    result = normalize_histogram(_flat(raw), alpha=0.5)

    assert result.normalized
    assert np.allclose(result.bins, expected)


def test_normalize_rejects_zero_mass_and_bad_alpha():
    with pytest.raises(HistogramError):
        normalize_histogram(_flat([0, 0]))
    with pytest.raises(HistogramError):
        normalize_histogram(_flat([1, 2]), alpha=0.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=1000), min_size=2, max_size=30).filter(any))
def test_square_root_normalisation_has_unit_norm(counts):
    bins = normalize_histogram(_flat(counts), alpha=0.5).bins

    assert np.isclose(np.sqrt((bins ** 2).sum()), 1.0)


def test_cosine_examples():
    a, b = _flat([0.6, 0.8]), _flat([0.8, 0.6])

    assert cosine_score(a, a) == pytest.approx(1.0)
    assert cosine_score(a, b) == pytest.approx(0.96)
    assert cosine_score(_flat([1, 0]), _flat([0, 1])) == 0.0


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(min_value=0.01, max_value=10), min_size=3, max_size=3),
    st.lists(st.floats(min_value=0.01, max_value=10), min_size=3, max_size=3),
)
def test_cosine_is_symmetric_and_bounded(x, y):
    a, b = _flat(x), _flat(y)

    assert cosine_score(a, b) == cosine_score(b, a)
    assert 0.0 <= cosine_score(a, b) <= 1.0


def test_cosine_rejects_zero_vectors():
    with pytest.raises(HistogramError):
        cosine_score(_flat([0, 0]), _flat([1, 0]))


def test_rank_database_orders_by_score_then_id():
    q = _flat([0.6, 0.8, 0.0])
    db = {
        0: _flat([0.8, 0.6, 0.0]),
        1: _flat([0.6, 0.8, 0.0]),
        2: _flat([0.0, 0.0, 1.0]),
        3: _flat([0.6, 0.8, 0.0]),
    }

    ranking = rank_database(q, db)

    assert ranking.image_ids.tolist() == [1, 3, 0, 2]
    assert ranking.scores[2] == pytest.approx(0.96)
    assert ranking.scores[3] == 0.0


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=12), st.data())
def test_rank_database_ignores_database_order(seed, n, data):
    rng = np.random.default_rng(seed)
    # a few repeated rows exercise the id tie-break
    rows = rng.uniform(0.01, 1.0, size=(n, 6))
    rows[rng.integers(0, n, size=n // 3)] = rows[0]
    q = _flat(rng.uniform(0.01, 1.0, size=6))
    order = data.draw(st.permutations(range(n)))

    forward = rank_database(q, {i: _flat(rows[i]) for i in range(n)})
    shuffled = rank_database(q, {i: _flat(rows[i]) for i in order})

    assert shuffled.image_ids.tolist() == forward.image_ids.tolist()
    assert shuffled.scores.tolist() == forward.scores.tolist()


def test_filter_top_k_truncates_and_clamps(logger):
    ranking = rank_database(_flat([1, 0]), {0: _flat([1, 0]), 1: _flat([1, 1]), 2: _flat([0, 1])})

    assert filter_top_k(ranking, 1).image_ids.tolist() == [0]
    assert len(filter_top_k(ranking, 5, logger=logger)) == 3


def test_filter_top_k_rejects_non_positive_k():
    ranking = rank_database(_flat([1, 0]), {0: _flat([1, 0])})

    with pytest.raises(ParameterError):
        filter_top_k(ranking, 0)
