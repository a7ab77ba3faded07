"""Build every derived store of a corpus: histograms, codebook, HE parameters, index."""

from dataclasses import dataclass
from typing import Optional, Sequence

from c2f_retrieval.codebook import (
    Codebook,
    DescriptorSet,
    quantize_matrix,
    root_preprocess_matrix,
    train_kmeans,
)
from c2f_retrieval.config import EngineConfig
from c2f_retrieval.embedding import HeParameters, sign_matrix, train_he
from c2f_retrieval.holistic import (
    HistogramStore,
    HsvHistogram,
    PixelImage,
    hsv_histogram,
    normalize_histogram,
)
from c2f_retrieval.index import FeatureBatch, IndexConfig, InvertedIndex, build_index
from c2f_retrieval.logging import get_logger
from c2f_retrieval.pipeline.c2f_pipeline import C2FPipeline


@dataclass(frozen=True)
class BuiltEngine:
    """The trained local layer of one corpus."""

    codebook: Codebook
    he: HeParameters
    index: InvertedIndex


def extract_histogram(image: PixelImage, config: EngineConfig) -> HsvHistogram:
    return normalize_histogram(hsv_histogram(image, config.hsv_dims), config.alpha)


def extract_histograms(
    images: Sequence[PixelImage],
    paths: Sequence[str],
    config: EngineConfig,
    logger=None,
) -> HistogramStore:
    logger = logger or get_logger("extract")
    logger.info(f"Extracting {len(images)} holistic histograms with dims={config.hsv_dims}")
    return HistogramStore.from_histograms(
        [extract_histogram(image, config) for image in images], paths
    )


def database_features(
    descriptors: DescriptorSet,
    codebook: Codebook,
    he: HeParameters,
) -> FeatureBatch:
    """Single-assigned, signed features of every database descriptor."""
    prepared = root_preprocess_matrix(descriptors.values)
    words = quantize_matrix(prepared, codebook)
    return FeatureBatch(
        image_ids=descriptors.image_ids,
        words=words,
        signatures=sign_matrix(prepared, words, he),
        k=codebook.k,
        d_b=he.d_b,
    )


def build_engine(
    descriptors: DescriptorSet,
    n_images: int,
    config: EngineConfig,
    logger=None,
) -> BuiltEngine:
    """
    Train the codebook and HE parameters on the database descriptors and index them.

    Parameters
    ----------
    descriptors : DescriptorSet
        Raw descriptors of the database, in corpus order.
    n_images : int
        Database size; images without descriptors are indexed too.
    config : EngineConfig
        Supplies k, iterations, d_b, h_t, sigma and the seed.
    logger :
        Optional Loguru logger instance.

    Returns
    -------
    BuiltEngine
        Identical for identical inputs and seed.
    """
    logger = logger or get_logger("build")
    logger.info("Starting engine build...")
    prepared = root_preprocess_matrix(descriptors.values)
    codebook = train_kmeans(
        prepared,
        k=config.codebook_size,
        iters=config.kmeans_iters,
        seed=config.seed,
        logger=logger,
    )
    he = train_he(codebook, prepared, d_b=config.d_b, seed=config.seed, logger=logger)
    index = build_index(
        database_features(descriptors, codebook, he),
        n_images=n_images,
        config=IndexConfig(k=codebook.k, d_b=he.d_b, h_t=config.h_t, sigma=config.sigma),
        logger=logger,
    )
    logger.info("Engine build completed.")
    return BuiltEngine(codebook=codebook, he=he, index=index)


def make_pipeline(
    histograms: HistogramStore,
    descriptors: DescriptorSet,
    engine: BuiltEngine,
    config: EngineConfig,
    mode: str = "c2f",
    logger=None,
) -> C2FPipeline:
    return C2FPipeline(
        histograms=histograms,
        codebook=engine.codebook,
        he=engine.he,
        index=engine.index,
        config=config.pipeline_config(mode=mode),
        descriptors=descriptors,
        logger=logger,
    )


def build_pipeline(
    images: Sequence[PixelImage],
    descriptors: DescriptorSet,
    config: EngineConfig,
    mode: str = "c2f",
    paths: Optional[Sequence[str]] = None,
    logger=None,
) -> C2FPipeline:
    """In-memory extract, build and assemble in one call."""
    paths = paths if paths is not None else [f"{i}.ppm" for i in range(len(images))]
    histograms = extract_histograms(images, paths, config, logger=logger)
    engine = build_engine(descriptors, len(images), config, logger=logger)
    return make_pipeline(histograms, descriptors, engine, config, mode=mode, logger=logger)
