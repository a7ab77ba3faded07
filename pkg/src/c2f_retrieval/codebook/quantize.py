"""Nearest-word assignment (hard and multiple)."""

from typing import List, Union

import numpy as np

from c2f_retrieval.codebook.descriptors import DescriptorError, LocalDescriptor
from c2f_retrieval.codebook.kmeans import Codebook, squared_distances
from c2f_retrieval.logging import get_logger


def _values(d: Union[LocalDescriptor, np.ndarray]) -> np.ndarray:
    values = d.values if isinstance(d, LocalDescriptor) else np.asarray(d, dtype=np.float64)
    return values.reshape(1, -1)


def quantize_matrix(values: np.ndarray, cb: Codebook) -> np.ndarray:
    """Word id of the nearest centroid for every row; ties go to the smallest id."""
    return squared_distances(values, cb.centroids).argmin(axis=1)


def multi_assign_matrix(values: np.ndarray, cb: Codebook, m: int, logger=None) -> np.ndarray:
    """The ``m`` nearest word ids of every row, nearest first, shape ``(n, m)``."""
    if m < 1:
        raise DescriptorError(f"multiple assignment needs m >= 1, got {m}")
    if m > cb.k:
        logger = logger or get_logger("multi-assign")
        logger.warning(f"MA multiplicity {m} exceeds codebook size {cb.k}; clamped.")
        m = cb.k
    distances = squared_distances(values, cb.centroids)
    return np.argsort(distances, axis=1, kind="stable")[:, :m]


def quantize(d: Union[LocalDescriptor, np.ndarray], cb: Codebook) -> int:
    """Visual word of one preprocessed descriptor."""
    return int(quantize_matrix(_values(d), cb)[0])


def multi_assign(
    d: Union[LocalDescriptor, np.ndarray], cb: Codebook, m: int = 3, logger=None
) -> List[int]:
    """Query-side multiple assignment; ``m`` larger than k is clamped to k."""
    return [int(w) for w in multi_assign_matrix(_values(d), cb, m, logger=logger)[0]]
