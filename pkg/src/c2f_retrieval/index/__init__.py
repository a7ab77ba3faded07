from c2f_retrieval.index.features import FeatureBatch, QuantizedFeature
from c2f_retrieval.index.inverted_index import (
    TF_MODES,
    IndexBuildError,
    IndexConfig,
    IndexConfigError,
    InvertedIndex,
    LocalScoreMap,
    build_index,
    compute_idf,
    score_candidates,
)
from c2f_retrieval.index.memory import (
    MemoryReport,
    candidate_memory,
    memory_report,
    posting_entry_bytes,
)
from c2f_retrieval.index.store import read_index, write_index

__all__ = [
    "FeatureBatch",
    "QuantizedFeature",
    "TF_MODES",
    "IndexBuildError",
    "IndexConfig",
    "IndexConfigError",
    "InvertedIndex",
    "LocalScoreMap",
    "build_index",
    "compute_idf",
    "score_candidates",
    "MemoryReport",
    "candidate_memory",
    "memory_report",
    "posting_entry_bytes",
    "read_index",
    "write_index",
]
