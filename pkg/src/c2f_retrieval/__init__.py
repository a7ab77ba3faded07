from c2f_retrieval.config import EngineConfig
from c2f_retrieval.pipeline import C2FPipeline, PipelineConfig, RankList, build_pipeline

__version__ = "0.1.0"

__all__ = [
    "EngineConfig",
    "C2FPipeline",
    "PipelineConfig",
    "RankList",
    "build_pipeline",
    "__version__",
]
