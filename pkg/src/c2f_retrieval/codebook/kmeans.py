"""Visual vocabulary: exact Lloyd k-means with k-means++ seeding."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from sklearn.cluster import kmeans_plusplus

from c2f_retrieval.codebook.descriptors import DescriptorError
from c2f_retrieval.logging import get_logger
from c2f_retrieval.storage import BinaryReader, BinaryWriter, StoreFormatError

MAGIC = b"C2FC"

# bytes of scratch memory for one distance block
_BLOCK_BYTES = 1 << 26


class CodebookTrainingError(ValueError):
    """Raised when a codebook cannot be trained (corpus smaller than k)."""


def as_float32_grid(values: np.ndarray) -> np.ndarray:
    """Round to float32 precision while keeping float64 storage."""
    return np.asarray(values, dtype=np.float32).astype(np.float64)


@dataclass(frozen=True)
class Codebook:
    """
    k centroids in D dimensions; centroid ids are 0..k-1.

    Centroids live on the float32 grid so that the C2FC file round-trips
    exactly.
    """

    centroids: np.ndarray
    seed: int = 0
    iterations: Optional[int] = None
    inertia_history: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        centroids = as_float32_grid(self.centroids)
        if centroids.ndim != 2 or centroids.shape[0] < 1:
            raise CodebookTrainingError("a codebook needs at least one centroid")
        if not np.all(np.isfinite(centroids)):
            raise CodebookTrainingError("centroids must be finite")
        centroids.setflags(write=False)
        object.__setattr__(self, "centroids", centroids)

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def dim(self) -> int:
        return int(self.centroids.shape[1])

    def write(self, path: Union[str, Path]) -> Path:
        return (
            BinaryWriter(MAGIC)
            .u32(self.dim)
            .u32(self.k)
            .array(self.centroids, "<f4")
            .u64(self.seed)
            .write(path)
        )

    @classmethod
    def read(cls, path: Union[str, Path]) -> "Codebook":
        reader = BinaryReader.open(path, MAGIC)
        dim = reader.u32()
        k = reader.u32()
        if dim == 0 or k == 0:
            raise StoreFormatError(path, f"invalid codebook header D={dim}, k={k}")
        centroids = reader.array(k * dim, "<f4").reshape(k, dim)
        seed = reader.u64()
        reader.expect_end()
        return cls(centroids=centroids, seed=seed)


def squared_distances(values: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """
    Exact squared Euclidean distances, shape ``(n, k)``.

    Each entry is a sum of squared coordinate differences, so its value
    does not depend on how rows are batched.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    centroids = np.asarray(centroids, dtype=np.float64)
    if values.shape[1] != centroids.shape[1]:
        raise DescriptorError(
            f"dimension mismatch: descriptors D={values.shape[1]}, "
            f"codebook D={centroids.shape[1]}"
        )
    n, k = values.shape[0], centroids.shape[0]
    out = np.empty((n, k), dtype=np.float64)
    rows = max(1, _BLOCK_BYTES // (8 * k * centroids.shape[1]))
    for start in range(0, n, rows):
        block = values[start:start + rows]
        diff = block[:, None, :] - centroids[None, :, :]
        out[start:start + rows] = (diff * diff).sum(axis=2)
    return out


def _assign(values: np.ndarray, centroids: np.ndarray):
    distances = squared_distances(values, centroids)
    labels = distances.argmin(axis=1)
    return labels, distances[np.arange(labels.size), labels]


def train_kmeans(
    descriptors: np.ndarray,
    k: int,
    iters: int = 25,
    seed: int = 0,
    logger=None,
) -> Codebook:
    """
    Train a codebook with Lloyd's k-means.

    Parameters
    ----------
    descriptors : ndarray of shape (n, D)
        Preprocessed training descriptors, in corpus order.
    k : int
        Vocabulary size.
    iters : int, default=25
        Maximum number of Lloyd iterations; training stops earlier once
        assignments are stable.
    seed : int, default=0
        Seed of the k-means++ initialisation.
    logger :
        Optional Loguru logger instance.

    Returns
    -------
    Codebook
        Deterministic for a given (corpus order, k, iters, seed). The
        within-cluster sum of squares of every iteration is kept in
        ``inertia_history``.

    Raises
    ------
    CodebookTrainingError
        If the corpus holds fewer than k descriptors.
    """
    logger = logger or get_logger("kmeans")
    values = np.atleast_2d(np.asarray(descriptors, dtype=np.float64))
    n = values.shape[0]
    if k < 1:
        raise CodebookTrainingError(f"k must be >= 1, got {k}")
    if n < k:
        message = f"corpus of {n} descriptors is smaller than k={k}"
        logger.error(message)
        raise CodebookTrainingError(message)

    logger.info(f"Training k-means: n={n}, D={values.shape[1]}, k={k}, iters={iters}")
    centroids, _ = kmeans_plusplus(values, n_clusters=k, random_state=seed)
    centroids = np.asarray(centroids, dtype=np.float64)

    history = []
    labels = None
    performed = 0
    for _ in range(max(iters, 0)):
        new_labels, costs = _assign(values, centroids)

        # Re-seed empty clusters from the points farthest from their centroid,
        # never emptying another cluster in the process
        counts = np.bincount(new_labels, minlength=k)
        empties = np.flatnonzero(counts == 0)
        while empties.size:
            movable = np.where(counts[new_labels] > 1, costs, -1.0)
            farthest = int(np.argmax(movable))
            counts[new_labels[farthest]] -= 1
            new_labels[farthest] = empties[0]
            counts[empties[0]] = 1
            costs[farthest] = 0.0
            centroids[empties[0]] = values[farthest]
            empties = np.flatnonzero(counts == 0)

        history.append(float(costs.sum()))
        performed += 1

        sums = np.zeros_like(centroids)
        np.add.at(sums, new_labels, values)
        centroids = sums / counts[:, None]

        if labels is not None and np.array_equal(labels, new_labels):
            labels = new_labels
            break
        labels = new_labels

    logger.info(
        f"k-means finished after {performed} iteration(s); "
        f"final inertia={history[-1] if history else float('nan'):.6g}"
    )
    return Codebook(
        centroids=centroids,
        seed=seed,
        iterations=performed,
        inertia_history=tuple(history),
    )
