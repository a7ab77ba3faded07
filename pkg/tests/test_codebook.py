import numpy as np
import pytest

from c2f_retrieval.codebook import (
    Codebook,
    CodebookTrainingError,
    DescriptorError,
    DescriptorSet,
    LocalDescriptor,
    multi_assign,
    quantize,
    root_preprocess,
    root_preprocess_matrix,
    train_kmeans,
)
from c2f_retrieval.storage import StoreFormatError


def test_root_preprocess_examples():
    assert np.allclose(root_preprocess_matrix([[1.0, 0.0, 0.0]]), [[1.0, 0.0, 0.0]])
    assert np.allclose(root_preprocess(LocalDescriptor(values=[4, 4, 4, 4])).values, 0.5)


def test_root_preprocess_output_has_unit_norm():
    values = np.random.default_rng(0).uniform(0, 5, size=(20, 8))

    assert np.allclose(np.linalg.norm(root_preprocess_matrix(values), axis=1), 1.0)


@pytest.mark.parametrize("bad", [[1.0, -0.5], [0.0, 0.0], [np.inf, 1.0]])
def test_root_preprocess_rejects_invalid_descriptors(bad):
    with pytest.raises(DescriptorError):
        root_preprocess_matrix([bad])


def test_kmeans_recovers_planted_cloud_means(planted_clouds, logger):
    points, first_mean, second_mean = planted_clouds

    codebook = train_kmeans(points, k=2, iters=25, seed=0, logger=logger)
    centroids = sorted(codebook.centroids.tolist(), key=lambda c: -c[0])

    assert np.allclose(centroids[0], first_mean, atol=1e-5)
    assert np.allclose(centroids[1], second_mean, atol=1e-5)


def test_kmeans_on_repeated_distinct_points_returns_them():
    distinct = np.eye(3) * 5.0
    corpus = np.vstack([distinct, distinct, distinct])

    codebook = train_kmeans(corpus, k=3, seed=1)

    assert sorted(map(tuple, codebook.centroids)) == sorted(map(tuple, distinct))


def test_single_centroid_is_corpus_mean(planted_clouds):
    points, _, _ = planted_clouds

    codebook = train_kmeans(points, k=1)

    assert np.allclose(codebook.centroids[0], points.mean(axis=0), atol=1e-5)


def test_kmeans_is_deterministic_for_a_seed(planted_clouds):
    points, _, _ = planted_clouds

    a = train_kmeans(points, k=4, seed=11)
    b = train_kmeans(points, k=4, seed=11)

    assert np.array_equal(a.centroids, b.centroids)
    assert a.inertia_history == b.inertia_history


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_kmeans_inertia_never_increases(seed):
    points = np.random.default_rng(seed).normal(size=(200, 6))

    history = train_kmeans(points, k=12, iters=30, seed=seed).inertia_history

    assert len(history) >= 2
    assert all(later <= earlier * (1 + 1e-12) for earlier, later in zip(history, history[1:]))


def test_kmeans_rejects_corpus_smaller_than_k():
    with pytest.raises(CodebookTrainingError):
        train_kmeans(np.ones((2, 3)), k=3)


def test_quantize_examples():
    codebook = Codebook(centroids=np.array([[5.0, 5.0], [1.0, 0.0], [9.0, 9.0], [3.0, 3.0], [-1.0, 0.0]]))

    assert quantize(np.array([3.0, 3.0]), codebook) == 3
    # equidistant from centroids 1 and 4
    assert quantize(np.array([0.0, 0.0]), codebook) == 1


def test_quantize_rejects_dimension_mismatch():
    codebook = Codebook(centroids=np.zeros((2, 3)))

    with pytest.raises(DescriptorError):
        quantize(np.zeros(4), codebook)


def test_multi_assign_orders_by_distance(logger):
    codebook = Codebook(centroids=np.array([[0.0], [10.0], [3.0]]))
    d = np.array([2.0])

    assert multi_assign(d, codebook, m=1) == [quantize(d, codebook)]
    assert multi_assign(d, codebook, m=2) == [2, 0]
    assert multi_assign(d, codebook, m=3) == [2, 0, 1]
    assert multi_assign(d, codebook, m=7, logger=logger) == [2, 0, 1]


def test_codebook_file_round_trip(tmp_path, planted_clouds):
    codebook = train_kmeans(planted_clouds[0], k=2, seed=5)

    loaded = Codebook.read(codebook.write(tmp_path / "cb.c2fc"))

    assert np.array_equal(loaded.centroids, codebook.centroids)
    assert loaded.seed == 5


def test_descriptor_set_file_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    descriptors = DescriptorSet(
        image_ids=np.array([0, 0, 1, 2]),
        values=rng.uniform(0, 1, size=(4, 6)),
        keypoints=rng.uniform(0, 10, size=(4, 3)),
    )

    loaded = DescriptorSet.read(descriptors.write(tmp_path / "d.c2fd"))

    assert np.array_equal(loaded.values, descriptors.values)
    assert np.array_equal(loaded.image_ids, descriptors.image_ids)
    assert len(loaded.descriptors(0)) == 2
    assert loaded.for_image(2).shape == (1, 6)


def test_truncated_descriptor_file_rejected(tmp_path):
    path = DescriptorSet(image_ids=[0], values=np.ones((1, 4))).write(tmp_path / "d.c2fd")
    path.write_bytes(path.read_bytes()[:-1])

    with pytest.raises(StoreFormatError):
        DescriptorSet.read(path)
