from c2f_retrieval.holistic.ppm import (
    PixelImage,
    PpmDecodeError,
    decode_ppm,
    encode_ppm,
    load_image,
)
from c2f_retrieval.holistic.histogram import (
    HistogramError,
    HsvHistogram,
    cosine_score,
    cosine_scores,
    hsv_histogram,
    normalize_histogram,
)
from c2f_retrieval.holistic.ranking import (
    HolisticScoreList,
    ParameterError,
    filter_top_k,
    order_by_score,
    rank_database,
)
from c2f_retrieval.holistic.store import HistogramStore

__all__ = [
    "PixelImage",
    "PpmDecodeError",
    "decode_ppm",
    "encode_ppm",
    "load_image",
    "HistogramError",
    "HsvHistogram",
    "cosine_score",
    "cosine_scores",
    "hsv_histogram",
    "normalize_histogram",
    "HolisticScoreList",
    "ParameterError",
    "filter_top_k",
    "order_by_score",
    "rank_database",
    "HistogramStore",
]
