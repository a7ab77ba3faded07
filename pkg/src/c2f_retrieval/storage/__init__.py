from c2f_retrieval.storage.binary import (
    BinaryReader,
    BinaryWriter,
    StoreFormatError,
    sha256_file,
)

__all__ = [
    "BinaryReader",
    "BinaryWriter",
    "StoreFormatError",
    "sha256_file",
]
