"""Little-endian codec helpers shared by every store file."""

import hashlib
import struct
from pathlib import Path
from typing import Union

import numpy as np


PathLike = Union[str, Path]


class StoreFormatError(ValueError):
    """Raised when a store file is malformed or truncated."""

    def __init__(self, path: PathLike, message: str):
        self.path = str(path)
        super().__init__(f"{self.path}: {message}")


class BinaryWriter:
    """
    Accumulate a little-endian binary payload.

    Purpose
    -------
    Give every store codec the same primitives so that a file written
    twice from identical inputs is byte-identical.
    """

    def __init__(self, magic: bytes):
        if len(magic) != 4:
            raise ValueError("magic must be exactly 4 bytes")
        self._chunks = [magic]

    def u32(self, value: int) -> "BinaryWriter":
        self._chunks.append(struct.pack("<I", int(value)))
        return self

    def u64(self, value: int) -> "BinaryWriter":
        self._chunks.append(struct.pack("<Q", int(value)))
        return self

    def f32(self, value: float) -> "BinaryWriter":
        self._chunks.append(struct.pack("<f", float(value)))
        return self

    def array(self, values: np.ndarray, dtype: str) -> "BinaryWriter":
        self._chunks.append(np.ascontiguousarray(values, dtype=dtype).tobytes())
        return self

    def raw(self, payload: bytes) -> "BinaryWriter":
        self._chunks.append(bytes(payload))
        return self

    def to_bytes(self) -> bytes:
        return b"".join(self._chunks)

    def write(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes())
        return path


class BinaryReader:
    """Sequential reader with magic and length checks."""

    def __init__(self, payload: bytes, magic: bytes, path: PathLike = "<memory>"):
        self.payload = payload
        self.path = path
        self.offset = 0
        found = self._take(4)
        if found != magic:
            raise StoreFormatError(
                path, f"bad magic {found!r}, expected {magic!r}"
            )

    @classmethod
    def open(cls, path: PathLike, magic: bytes) -> "BinaryReader":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"store file not found: {path}")
        return cls(path.read_bytes(), magic, path)

    def _take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.payload):
            raise StoreFormatError(
                self.path,
                f"truncated at byte {self.offset}: need {size} more bytes, "
                f"{len(self.payload) - self.offset} available",
            )
        chunk = self.payload[self.offset:end]
        self.offset = end
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def f32(self) -> float:
        return struct.unpack("<f", self._take(4))[0]

    def array(self, count: int, dtype: str) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        chunk = self._take(count * itemsize)
        return np.frombuffer(chunk, dtype=dtype, count=count).copy()

    def raw(self, size: int) -> bytes:
        return self._take(size)

    def expect_end(self) -> None:
        if self.offset != len(self.payload):
            raise StoreFormatError(
                self.path,
                f"{len(self.payload) - self.offset} trailing bytes after payload",
            )


def sha256_file(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()
