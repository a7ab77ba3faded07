"""Local descriptors and the C2FD descriptor store."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from c2f_retrieval.storage import BinaryReader, BinaryWriter, StoreFormatError

MAGIC = b"C2FD"


class DescriptorError(ValueError):
    """Raised for invalid descriptors (negative, all-zero, non-finite, wrong D)."""


@dataclass(frozen=True)
class LocalDescriptor:
    """One D-dimensional local descriptor owned by a database image."""

    values: np.ndarray
    image_id: int = 0
    keypoint: Optional[Tuple[float, float, float]] = field(default=None)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise DescriptorError("descriptor must have at least one dimension")
        if not np.all(np.isfinite(values)):
            raise DescriptorError("descriptor values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return int(self.values.size)


class DescriptorSet:
    """
    Descriptors of a whole corpus held column-wise.

    Rows are grouped by nothing in particular; ``for_image`` selects the
    rows owned by one image in file order.
    """

    def __init__(
        self,
        image_ids: np.ndarray,
        values: np.ndarray,
        keypoints: Optional[np.ndarray] = None,
    ):
        values = np.asarray(values, dtype=np.float32)
        if values.ndim != 2:
            raise DescriptorError("descriptor matrix must be two-dimensional")
        image_ids = np.asarray(image_ids, dtype=np.uint32).reshape(-1)
        if image_ids.size != values.shape[0]:
            raise DescriptorError(
                f"{image_ids.size} image ids for {values.shape[0]} descriptors"
            )
        if keypoints is None:
            keypoints = np.zeros((values.shape[0], 3), dtype=np.float32)
        keypoints = np.asarray(keypoints, dtype=np.float32).reshape(-1, 3)
        if keypoints.shape[0] != values.shape[0]:
            raise DescriptorError("keypoint rows must match descriptor rows")
        if not np.all(np.isfinite(values)):
            raise DescriptorError("descriptor values must be finite")
        for array in (image_ids, values, keypoints):
            array.setflags(write=False)
        self.image_ids = image_ids
        self.values = values
        self.keypoints = keypoints

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    def for_image(self, image_id: int) -> np.ndarray:
        return self.values[self.image_ids == image_id]

    def descriptors(self, image_id: int):
        rows = np.flatnonzero(self.image_ids == image_id)
        return [
            LocalDescriptor(
                values=self.values[r],
                image_id=int(image_id),
                keypoint=tuple(float(v) for v in self.keypoints[r]),
            )
            for r in rows
        ]

    # ------------------------------------------------------------------
    # File format
    # ------------------------------------------------------------------
    def write(self, path: Union[str, Path]) -> Path:
        records = np.empty(
            len(self),
            dtype=[
                ("image_id", "<u4"),
                ("keypoint", "<f4", (3,)),
                ("values", "<f4", (self.dim,)),
            ],
        )
        records["image_id"] = self.image_ids
        records["keypoint"] = self.keypoints
        records["values"] = self.values
        return (
            BinaryWriter(MAGIC)
            .u32(self.dim)
            .u32(len(self))
            .raw(records.tobytes())
            .write(path)
        )

    @classmethod
    def read(cls, path: Union[str, Path]) -> "DescriptorSet":
        reader = BinaryReader.open(path, MAGIC)
        dim = reader.u32()
        count = reader.u32()
        if dim == 0:
            raise StoreFormatError(path, "descriptor dimension D must be >= 1")
        record = np.dtype(
            [
                ("image_id", "<u4"),
                ("keypoint", "<f4", (3,)),
                ("values", "<f4", (dim,)),
            ]
        )
        records = np.frombuffer(reader.raw(record.itemsize * count), dtype=record)
        reader.expect_end()
        try:
            return cls(
                image_ids=records["image_id"].copy(),
                values=records["values"].copy(),
                keypoints=records["keypoint"].copy(),
            )
        except DescriptorError as exc:
            raise StoreFormatError(path, str(exc)) from exc
