"""HSV colour histograms: extraction, power normalisation and cosine scoring."""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from matplotlib.colors import rgb_to_hsv

from c2f_retrieval.holistic.ppm import PixelImage


HsvDims = Tuple[int, int, int]


class HistogramError(ValueError):
    """Raised for undefined histogram operations (zero mass, shape mismatch)."""


@dataclass(frozen=True)
class HsvHistogram:
    """
    P-dimensional colour histogram, ``P = H_bins * S_bins * V_bins``.

    ``normalized`` records whether the l1 + power step has been applied.
    """

    bins: np.ndarray
    dims: HsvDims
    normalized: bool = field(default=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or min(dims) < 1:
            raise HistogramError(f"dims must be three integers >= 1, got {self.dims}")
        bins = np.array(self.bins, dtype=np.float64).reshape(-1)
        if bins.size != dims[0] * dims[1] * dims[2]:
            raise HistogramError(
                f"{bins.size} bins do not match dims {dims} "
                f"(P={dims[0] * dims[1] * dims[2]})"
            )
        if np.any(bins < 0) or not np.all(np.isfinite(bins)):
            raise HistogramError("histogram bins must be finite and non-negative")
        bins.setflags(write=False)
        object.__setattr__(self, "bins", bins)
        object.__setattr__(self, "dims", dims)

    @property
    def size(self) -> int:
        return int(self.bins.size)


def hsv_bin_indices(pixels: np.ndarray, dims: HsvDims) -> np.ndarray:
    """
    Flat bin index of every pixel of an ``(..., 3)`` uint8 RGB array.

    Hue is binned over [0, 360); S = 1 and V = 1 fall in the top bin;
    achromatic pixels get H = 0 and S = 0.
    """
    h_bins, s_bins, v_bins = dims
    rgb = np.asarray(pixels, dtype=np.float64).reshape(-1, 3) / 255.0
    hsv = rgb_to_hsv(rgb)

    # rgb_to_hsv reports hue as a fraction of the full turn
    h_idx = np.minimum(np.floor(hsv[:, 0] * h_bins), h_bins - 1).astype(np.int64)
    s_idx = np.minimum(np.floor(hsv[:, 1] * s_bins), s_bins - 1).astype(np.int64)
    v_idx = np.minimum(np.floor(hsv[:, 2] * v_bins), v_bins - 1).astype(np.int64)
    return h_idx * s_bins * v_bins + s_idx * v_bins + v_idx


def hsv_histogram(img: PixelImage, dims: HsvDims = (20, 10, 5)) -> HsvHistogram:
    """Raw per-bin pixel counts of an image in HSV space."""
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise HistogramError(f"dims must be three integers >= 1, got {dims}")
    size = dims[0] * dims[1] * dims[2]
    counts = np.bincount(hsv_bin_indices(img.pixels, dims), minlength=size)
    return HsvHistogram(bins=counts.astype(np.float64), dims=dims)


def normalize_histogram(h: HsvHistogram, alpha: float = 0.5) -> HsvHistogram:
    """
    l1-normalise then raise every bin to the power ``alpha``.

    With ``alpha = 0.5`` the result has unit l2 norm.
    """
    if not 0.0 < alpha <= 1.0:
        raise HistogramError(f"alpha must lie in (0, 1], got {alpha}")
    mass = float(h.bins.sum())
    if mass <= 0.0:
        raise HistogramError("cannot normalise an all-zero histogram")
    scaled = np.abs(h.bins / mass) ** alpha
    return HsvHistogram(bins=scaled, dims=h.dims, normalized=True)


def _row_norms(matrix: np.ndarray) -> np.ndarray:
    return np.sqrt((matrix * matrix).sum(axis=1))


def cosine_scores(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """
    Cosine similarity of every row of ``matrix`` with ``query``.

    The query norm is computed through the same row reduction as the
    database norms so that single-pair scores are exactly symmetric.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    query = np.asarray(query, dtype=np.float64).reshape(-1)
    if matrix.shape[1] != query.size:
        raise HistogramError(
            f"dimension mismatch: database P={matrix.shape[1]}, query P={query.size}"
        )
    query_norm = _row_norms(query[None, :])[0]
    row_norms = _row_norms(matrix)
    if query_norm == 0.0 or np.any(row_norms == 0.0):
        raise HistogramError("cosine similarity is undefined for zero-norm vectors")
    dots = (matrix * query[None, :]).sum(axis=1)
    return np.clip(dots / (row_norms * query_norm), -1.0, 1.0)


def cosine_score(q: HsvHistogram, d: HsvHistogram) -> float:
    """Cosine similarity between two histograms; symmetric, 1.0 for identical inputs."""
    if q.size != d.size:
        raise HistogramError(f"dimension mismatch: {q.size} vs {d.size}")
    return float(cosine_scores(d.bins[None, :], q.bins)[0])
