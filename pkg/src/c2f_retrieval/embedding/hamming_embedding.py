"""Hamming embedding: random orthonormal projection and per-word median thresholds."""

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Union

import numpy as np

from c2f_retrieval.codebook.descriptors import DescriptorError, LocalDescriptor
from c2f_retrieval.codebook.kmeans import Codebook, as_float32_grid
from c2f_retrieval.codebook.quantize import quantize_matrix
from c2f_retrieval.embedding.signature import (
    BinarySignature,
    EmbeddingError,
    hamming,
    packed_width,
)
from c2f_retrieval.logging import get_logger
from c2f_retrieval.storage import BinaryReader, BinaryWriter, StoreFormatError

if TYPE_CHECKING:
    from c2f_retrieval.index.features import QuantizedFeature

MAGIC = b"C2FE"

_BLOCK_BYTES = 1 << 26


@dataclass(frozen=True)
class HeParameters:
    """
    Projection (d_b x D, orthonormal rows) and per-word thresholds (k x d_b).

    Both matrices live on the float32 grid so the C2FE file round-trips
    exactly.
    """

    projection: np.ndarray
    thresholds: np.ndarray
    seed: int = 0

    def __post_init__(self):
        projection = as_float32_grid(self.projection)
        thresholds = as_float32_grid(self.thresholds)
        if projection.ndim != 2 or thresholds.ndim != 2:
            raise EmbeddingError("projection and thresholds must be matrices")
        if thresholds.shape[1] != projection.shape[0]:
            raise EmbeddingError(
                f"thresholds have {thresholds.shape[1]} columns, projection "
                f"has {projection.shape[0]} rows"
            )
        if not (np.all(np.isfinite(projection)) and np.all(np.isfinite(thresholds))):
            raise EmbeddingError("HE parameters must be finite")
        projection.setflags(write=False)
        thresholds.setflags(write=False)
        object.__setattr__(self, "projection", projection)
        object.__setattr__(self, "thresholds", thresholds)

    @property
    def d_b(self) -> int:
        return int(self.projection.shape[0])

    @property
    def dim(self) -> int:
        return int(self.projection.shape[1])

    @property
    def k(self) -> int:
        return int(self.thresholds.shape[0])

    def write(self, path: Union[str, Path]) -> Path:
        return (
            BinaryWriter(MAGIC)
            .u32(self.dim)
            .u32(self.d_b)
            .u32(self.k)
            .array(self.projection, "<f4")
            .array(self.thresholds, "<f4")
            .u64(self.seed)
            .write(path)
        )

    @classmethod
    def read(cls, path: Union[str, Path]) -> "HeParameters":
        reader = BinaryReader.open(path, MAGIC)
        dim = reader.u32()
        d_b = reader.u32()
        k = reader.u32()
        if dim == 0 or d_b == 0 or k == 0:
            raise StoreFormatError(path, f"invalid HE header D={dim}, d_b={d_b}, k={k}")
        projection = reader.array(d_b * dim, "<f4").reshape(d_b, dim)
        thresholds = reader.array(k * d_b, "<f4").reshape(k, d_b)
        seed = reader.u64()
        reader.expect_end()
        return cls(projection=projection, thresholds=thresholds, seed=seed)


def random_orthonormal_rows(dim: int, d_b: int, seed: int) -> np.ndarray:
    """First ``d_b`` rows of a seeded random orthogonal ``dim x dim`` matrix."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    # fix column signs so the factorisation is unique
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)[None, :]
    return q[:d_b]


def project(values: np.ndarray, projection: np.ndarray) -> np.ndarray:
    """
    Projected coordinates on the float32 grid, shape ``(n, d_b)``.

    Computed row by row so that a descriptor projects identically whatever
    batch it arrives in.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if values.shape[1] != projection.shape[1]:
        raise DescriptorError(
            f"dimension mismatch: descriptors D={values.shape[1]}, "
            f"projection D={projection.shape[1]}"
        )
    out = np.empty((values.shape[0], projection.shape[0]), dtype=np.float64)
    rows = max(1, _BLOCK_BYTES // (8 * projection.size))
    for start in range(0, values.shape[0], rows):
        block = values[start:start + rows]
        out[start:start + rows] = (block[:, None, :] * projection[None, :, :]).sum(axis=2)
    return as_float32_grid(out)


def train_he(
    cb: Codebook,
    training: np.ndarray,
    d_b: int = 128,
    seed: int = 0,
    logger=None,
) -> HeParameters:
    """
    Learn Hamming-embedding parameters for a codebook.

    Parameters
    ----------
    cb : Codebook
        Vocabulary the thresholds are attached to.
    training : ndarray of shape (n, D)
        Preprocessed training descriptors.
    d_b : int, default=128
        Signature length in bits; must not exceed D.
    seed : int, default=0
        Seed of the random orthonormal projection.
    logger :
        Optional Loguru logger instance.

    Returns
    -------
    HeParameters
        threshold[j][i] is the median i-th projected coordinate of the
        training descriptors quantised to word j (0 for words without
        training data).
    """
    logger = logger or get_logger("hamming-embedding")
    training = np.atleast_2d(np.asarray(training, dtype=np.float64))
    if training.shape[1] != cb.dim:
        raise DescriptorError(
            f"training descriptors have D={training.shape[1]}, codebook D={cb.dim}"
        )
    if d_b < 1 or d_b > cb.dim:
        message = f"signature length d_b={d_b} must lie in [1, D={cb.dim}]"
        logger.error(message)
        raise EmbeddingError(message)

    logger.info(f"Training Hamming embedding: d_b={d_b}, k={cb.k}, n={training.shape[0]}")
    projection = as_float32_grid(random_orthonormal_rows(cb.dim, d_b, seed))
    projected = project(training, projection)
    labels = quantize_matrix(training, cb)

    thresholds = np.zeros((cb.k, d_b), dtype=np.float64)
    order = np.argsort(labels, kind="stable")
    words, starts = np.unique(labels[order], return_index=True)
    for word, group in zip(words, np.split(order, starts[1:])):
        thresholds[word] = np.median(projected[group], axis=0)

    empty = cb.k - words.size
    if empty:
        logger.warning(f"{empty} word(s) received no training descriptors, thresholds set to 0.")
    return HeParameters(projection=projection, thresholds=thresholds, seed=seed)


def _check_words(words: np.ndarray, he: HeParameters) -> None:
    if words.size and (words.min() < 0 or words.max() >= he.k):
        raise EmbeddingError(f"word ids must lie in [0, {he.k})")


def sign_matrix(values: np.ndarray, words: np.ndarray, he: HeParameters) -> np.ndarray:
    """
    Packed signatures, shape ``(n, ceil(d_b / 8))``, for rows paired with words.

    Bit i is set iff the i-th projected coordinate exceeds the word's
    i-th threshold.
    """
    words = np.asarray(words, dtype=np.int64).reshape(-1)
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if values.shape[0] != words.size:
        raise EmbeddingError(f"{values.shape[0]} descriptors for {words.size} words")
    _check_words(words, he)
    flags = project(values, he.projection) > he.thresholds[words]
    packed = np.packbits(flags, axis=1, bitorder="big")
    return packed.reshape(words.size, packed_width(he.d_b))


def sign(d: Union[LocalDescriptor, np.ndarray], word: int, he: HeParameters) -> BinarySignature:
    """Signature of one descriptor relative to its visual word."""
    values = d.values if isinstance(d, LocalDescriptor) else np.asarray(d, dtype=np.float64)
    packed = sign_matrix(values.reshape(1, -1), np.array([word]), he)[0]
    return BinarySignature.from_packed(packed.tobytes(), he.d_b)


def matches(x: "QuantizedFeature", y: "QuantizedFeature", h_t: int = 52) -> bool:
    """Same visual word and Hamming distance at most ``h_t``."""
    if x.word != y.word:
        return False
    return hamming(x.signature, y.signature) <= h_t
