"""C2FH histogram store with its UTF-8 path manifest sidecar."""

from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from c2f_retrieval.holistic.histogram import (
    HistogramError,
    HsvDims,
    HsvHistogram,
    cosine_scores,
)
from c2f_retrieval.holistic.ranking import HolisticScoreList, order_by_score
from c2f_retrieval.storage import BinaryReader, BinaryWriter, StoreFormatError

MAGIC = b"C2FH"


def manifest_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".manifest")


class HistogramStore:
    """
    Normalised histograms of the whole database, image ids implicit by row.

    Purpose
    -------
    Hold the only per-image data the coarse layer needs, in one
    float32 matrix that every query scans once.
    """

    def __init__(
        self,
        histograms: np.ndarray,
        paths: Sequence[str],
        dims: HsvDims,
    ):
        matrix = np.asarray(histograms, dtype=np.float32)
        if matrix.ndim != 2:
            raise HistogramError("histogram matrix must be two-dimensional")
        dims = tuple(int(d) for d in dims)
        if matrix.shape[1] != dims[0] * dims[1] * dims[2]:
            raise HistogramError(
                f"store width {matrix.shape[1]} does not match dims {dims}"
            )
        if len(paths) != matrix.shape[0]:
            raise HistogramError(
                f"{len(paths)} manifest paths for {matrix.shape[0]} histograms"
            )
        matrix.setflags(write=False)
        self.matrix = matrix
        self.paths: List[str] = [str(p) for p in paths]
        self.dims: HsvDims = dims

    @classmethod
    def from_histograms(
        cls, histograms: Sequence[HsvHistogram], paths: Sequence[str]
    ) -> "HistogramStore":
        if not histograms:
            raise HistogramError("cannot build a store from zero histograms")
        dims = histograms[0].dims
        return cls(np.stack([h.bins for h in histograms]), paths, dims)

    def __len__(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def size(self) -> int:
        return int(self.matrix.shape[1])

    def histogram(self, image_id: int) -> HsvHistogram:
        return HsvHistogram(
            bins=self.matrix[image_id].astype(np.float64),
            dims=self.dims,
            normalized=True,
        )

    def as_mapping(self) -> Dict[int, HsvHistogram]:
        return {i: self.histogram(i) for i in range(len(self))}

    def rank(self, q: HsvHistogram, subset: Optional[np.ndarray] = None) -> HolisticScoreList:
        """Vectorised ``rank_database`` over the store (or a subset of its rows)."""
        ids = np.arange(len(self), dtype=np.int64) if subset is None else np.asarray(subset, dtype=np.int64)
        matrix = self.matrix[ids].astype(np.float64)
        return order_by_score(ids, cosine_scores(matrix, q.bins))

    # ------------------------------------------------------------------
    # File format
    # ------------------------------------------------------------------
    def write(self, path: Union[str, Path]) -> Path:
        path = (
            BinaryWriter(MAGIC)
            .u32(self.size)
            .u32(len(self))
            .array(self.matrix, "<f4")
            .write(path)
        )
        manifest_path(path).write_text(
            "".join(f"{p}\n" for p in self.paths), encoding="utf-8"
        )
        return path

    @classmethod
    def read(cls, path: Union[str, Path], dims: HsvDims) -> "HistogramStore":
        reader = BinaryReader.open(path, MAGIC)
        size = reader.u32()
        count = reader.u32()
        matrix = reader.array(size * count, "<f4").reshape(count, size)
        reader.expect_end()

        sidecar = manifest_path(path)
        if not sidecar.is_file():
            raise StoreFormatError(path, f"missing manifest sidecar {sidecar}")
        paths = sidecar.read_text(encoding="utf-8").splitlines()
        if len(paths) != count:
            raise StoreFormatError(
                sidecar, f"manifest lists {len(paths)} paths, store holds {count}"
            )
        try:
            return cls(matrix, paths, dims)
        except HistogramError as exc:
            raise StoreFormatError(path, str(exc)) from exc
