"""Byte accounting of the index and of the per-query candidate working set."""

from dataclasses import dataclass
from typing import Dict, Iterable

import numpy as np

from c2f_retrieval.embedding.signature import packed_width
from c2f_retrieval.index.inverted_index import InvertedIndex

IMAGE_ID_BYTES = 4
FLOAT_BYTES = 4


@dataclass(frozen=True)
class MemoryReport:
    """Resident bytes of one index, split by component."""

    postings_bytes: int
    idf_bytes: int
    norms_bytes: int
    offsets_bytes: int
    per_word_bytes: np.ndarray

    @property
    def total_bytes(self) -> int:
        return self.postings_bytes + self.idf_bytes + self.norms_bytes + self.offsets_bytes

    def as_dict(self) -> Dict[str, int]:
        return {
            "postings_bytes": self.postings_bytes,
            "idf_bytes": self.idf_bytes,
            "norms_bytes": self.norms_bytes,
            "offsets_bytes": self.offsets_bytes,
            "total_bytes": self.total_bytes,
            "largest_word_bytes": int(self.per_word_bytes.max()) if self.per_word_bytes.size else 0,
        }


def posting_entry_bytes(d_b: int) -> int:
    return IMAGE_ID_BYTES + packed_width(d_b)


def memory_report(idx: InvertedIndex) -> MemoryReport:
    """
    Bytes held by the index.

    Each posting costs a 4-byte image id plus ``ceil(d_b / 8)`` signature
    bytes; idf and norms are one float32 per word and per image.
    """
    entry = posting_entry_bytes(idx.config.d_b)
    per_word = np.diff(idx.offsets) * entry
    return MemoryReport(
        postings_bytes=idx.n_postings * entry,
        idf_bytes=FLOAT_BYTES * idx.config.k,
        norms_bytes=FLOAT_BYTES * idx.n_images,
        offsets_bytes=8 * (idx.config.k + 1),
        per_word_bytes=per_word,
    )


def candidate_memory(idx: InvertedIndex, candidates: Iterable[int]) -> int:
    """Posting bytes owned by ``candidates``: what a candidate-only scan touches at most."""
    cand = np.unique(np.fromiter((int(c) for c in candidates), dtype=np.int64))
    if cand.size == 0 or idx.n_postings == 0:
        return 0
    owned = np.isin(idx.posting_images.astype(np.int64), cand)
    return int(owned.sum()) * posting_entry_bytes(idx.config.d_b)
