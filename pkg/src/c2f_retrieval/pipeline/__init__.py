from c2f_retrieval.holistic import ParameterError
from c2f_retrieval.pipeline.c2f_pipeline import (
    MODES,
    C2FPipeline,
    FusionError,
    PipelineConfig,
    RankEntry,
    RankList,
    encode_query,
    fuse_scores,
)
from c2f_retrieval.pipeline.builder import (
    BuiltEngine,
    build_engine,
    build_pipeline,
    database_features,
    extract_histogram,
    extract_histograms,
    make_pipeline,
)

__all__ = [
    "ParameterError",
    "MODES",
    "C2FPipeline",
    "FusionError",
    "PipelineConfig",
    "RankEntry",
    "RankList",
    "encode_query",
    "fuse_scores",
    "BuiltEngine",
    "build_engine",
    "build_pipeline",
    "database_features",
    "extract_histogram",
    "extract_histograms",
    "make_pipeline",
]
