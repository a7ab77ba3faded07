"""C2FI inverted index store."""

from pathlib import Path
from typing import Union

import numpy as np

from c2f_retrieval.embedding.signature import packed_width
from c2f_retrieval.index.inverted_index import IndexConfig, IndexConfigError, InvertedIndex
from c2f_retrieval.storage import BinaryReader, BinaryWriter, StoreFormatError

MAGIC = b"C2FI"


def write_index(idx: InvertedIndex, path: Union[str, Path]) -> Path:
    """
    Layout: ``k, d_b, h_t`` (u32), ``sigma`` (f32), ``n_images`` (u32);
    then per word a u32 posting count followed by interleaved
    (u32 image id, packed signature) records; then ``n_images`` f32 norms
    and ``k`` f32 idf values.
    """
    config = idx.config
    nbytes = packed_width(config.d_b)
    record = np.dtype([("image", "<u4"), ("signature", "u1", (nbytes,))])
    writer = (
        BinaryWriter(MAGIC)
        .u32(config.k)
        .u32(config.d_b)
        .u32(config.h_t)
        .f32(config.sigma)
        .u32(idx.n_images)
    )
    for word in range(config.k):
        images, signatures = idx.postings(word)
        records = np.empty(images.size, dtype=record)
        records["image"] = images
        records["signature"] = signatures
        writer.u32(images.size).raw(records.tobytes())
    writer.array(idx.image_norms, "<f4").array(idx.idf, "<f4")
    return writer.write(path)


def read_index(path: Union[str, Path]) -> InvertedIndex:
    reader = BinaryReader.open(path, MAGIC)
    k, d_b, h_t = reader.u32(), reader.u32(), reader.u32()
    sigma = reader.f32()
    n_images = reader.u32()
    try:
        config = IndexConfig(k=k, d_b=d_b, h_t=h_t, sigma=sigma)
    except IndexConfigError as exc:
        raise StoreFormatError(path, str(exc)) from exc

    nbytes = packed_width(d_b)
    record = np.dtype([("image", "<u4"), ("signature", "u1", (nbytes,))])
    counts = np.zeros(k, dtype=np.int64)
    chunks = []
    for word in range(k):
        counts[word] = reader.u32()
        chunk = reader.raw(int(counts[word]) * record.itemsize)
        records = np.frombuffer(chunk, dtype=record)
        if records.size and np.any(np.diff(records["image"].astype(np.int64)) < 0):
            raise StoreFormatError(path, f"posting list of word {word} is not sorted by image id")
        chunks.append(records)
    norms = reader.array(n_images, "<f4")
    idf = reader.array(k, "<f4")
    reader.expect_end()

    records = np.concatenate(chunks) if chunks else np.empty(0, dtype=record)
    if records.size and int(records["image"].max()) >= n_images:
        raise StoreFormatError(path, f"posting references image {int(records['image'].max())} >= {n_images}")
    if np.any(norms <= 0):
        raise StoreFormatError(path, "image norms must be positive")

    offsets = np.zeros(k + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(counts)
    images = records["image"].astype(np.uint32)
    # norm 1 marks an image that had no informative feature at build time
    has_mass = np.bincount(images, weights=idf[_word_of_rows(offsets)] ** 2, minlength=n_images) > 0
    flagged = np.flatnonzero(~has_mass & (norms == 1.0))
    return InvertedIndex(
        offsets=offsets,
        posting_images=images,
        posting_signatures=np.ascontiguousarray(records["signature"]).reshape(-1, nbytes),
        idf=idf,
        image_norms=norms,
        config=config,
        flagged_images=tuple(flagged.tolist()),
    )


def _word_of_rows(offsets: np.ndarray) -> np.ndarray:
    return np.repeat(np.arange(offsets.size - 1), np.diff(offsets))
