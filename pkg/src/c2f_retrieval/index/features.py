"""Quantised features: (visual word, binary signature) pairs per image."""

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from c2f_retrieval.embedding.signature import BinarySignature, EmbeddingError, packed_width


@dataclass(frozen=True)
class QuantizedFeature:
    """One local descriptor after quantisation and signing."""

    word: int
    signature: BinarySignature
    image_id: int = 0


class FeatureBatch:
    """
    Column-wise quantised features.

    ``k`` and ``d_b`` record the codebook size and signature length the
    features were produced with, so an index can refuse foreign batches.
    """

    def __init__(
        self,
        image_ids: np.ndarray,
        words: np.ndarray,
        signatures: np.ndarray,
        k: int,
        d_b: int,
    ):
        image_ids = np.asarray(image_ids, dtype=np.uint32).reshape(-1)
        words = np.asarray(words, dtype=np.int64).reshape(-1)
        signatures = np.asarray(signatures, dtype=np.uint8).reshape(-1, packed_width(d_b))
        if not image_ids.size == words.size == signatures.shape[0]:
            raise EmbeddingError("image ids, words and signatures must have equal length")
        if words.size and (words.min() < 0 or words.max() >= k):
            raise EmbeddingError(f"word ids must lie in [0, {k})")
        for array in (image_ids, words, signatures):
            array.setflags(write=False)
        self.image_ids = image_ids
        self.words = words
        self.signatures = signatures
        self.k = int(k)
        self.d_b = int(d_b)

    def __len__(self) -> int:
        return int(self.words.size)

    @classmethod
    def from_features(
        cls, features: Sequence[QuantizedFeature], k: int, d_b: int
    ) -> "FeatureBatch":
        for feature in features:
            if feature.signature.width != d_b:
                raise EmbeddingError(
                    f"signature width {feature.signature.width} differs from d_b={d_b}"
                )
        nbytes = packed_width(d_b)
        packed = np.frombuffer(
            b"".join(f.signature.packed() for f in features), dtype=np.uint8
        ).reshape(len(features), nbytes)
        return cls(
            image_ids=np.array([f.image_id for f in features], dtype=np.uint32),
            words=np.array([f.word for f in features], dtype=np.int64),
            signatures=packed,
            k=k,
            d_b=d_b,
        )

    def features(self) -> Iterator[QuantizedFeature]:
        for image_id, word, packed in zip(self.image_ids, self.words, self.signatures):
            yield QuantizedFeature(
                word=int(word),
                signature=BinarySignature.from_packed(packed.tobytes(), self.d_b),
                image_id=int(image_id),
            )
