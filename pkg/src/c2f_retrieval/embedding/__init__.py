from c2f_retrieval.embedding.signature import (
    BinarySignature,
    EmbeddingError,
    POPCOUNT_TABLE,
    hamming,
    hamming_packed,
    packed_width,
)
from c2f_retrieval.embedding.hamming_embedding import (
    HeParameters,
    matches,
    project,
    random_orthonormal_rows,
    sign,
    sign_matrix,
    train_he,
)

__all__ = [
    "BinarySignature",
    "EmbeddingError",
    "POPCOUNT_TABLE",
    "hamming",
    "hamming_packed",
    "packed_width",
    "HeParameters",
    "matches",
    "project",
    "random_orthonormal_rows",
    "sign",
    "sign_matrix",
    "train_he",
]
