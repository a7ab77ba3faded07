import numpy as np
import pytest

from c2f_retrieval.config import EngineConfig
from c2f_retrieval.holistic import PixelImage
from c2f_retrieval.logging import configure_logging, get_logger
from c2f_retrieval.pipeline import build_pipeline
from c2f_retrieval.synthgen import SynthSpec, generate

# Frozen seed of the synthetic fixtures used across the suite.
FIXTURE_SEED = 7


def small_engine_config(spec: SynthSpec, **overrides) -> EngineConfig:
    """Desk-scale settings: 16-bit signatures on 32-D descriptors, one word per planted cluster."""
    base = EngineConfig(
        codebook_size=spec.n_words,
        kmeans_iters=25,
        d_b=16,
        h_t=6,
        sigma=3.25,
        ma=1,
        candidates=spec.n_images,
        seed=0,
    )
    return base.with_overrides(**overrides)


@pytest.fixture(autouse=True)
def fresh_log_sink():
    """Bind the stderr sink to the stream of the running test."""
    configure_logging()
    yield


@pytest.fixture
def logger():
    return get_logger("test")


@pytest.fixture
def red_image():
    return PixelImage(width=1, height=1, pixels=np.array([[[255, 0, 0]]], dtype=np.uint8))


@pytest.fixture
def checker_image():
    pixels = np.zeros((4, 4, 3), dtype=np.uint8)
    pixels[::2, ::2] = (255, 255, 255)
    pixels[1::2, 1::2] = (0, 0, 255)
    return PixelImage(width=4, height=4, pixels=pixels)


@pytest.fixture
def planted_clouds():
    """Two well-separated clouds in 4-D; their exact means are returned with the points."""
    rng = np.random.default_rng(FIXTURE_SEED)
    first = np.array([10.0, 0.0, 0.0, 0.0]) + rng.normal(0.0, 0.1, size=(40, 4))
    second = np.array([0.0, 0.0, 10.0, 0.0]) + rng.normal(0.0, 0.1, size=(40, 4))
    return np.vstack([first, second]), first.mean(axis=0), second.mean(axis=0)


@pytest.fixture(scope="session")
def perfect_spec():
    return SynthSpec(n_groups=4, group_size=4, n_distractors=8, seed=FIXTURE_SEED)


@pytest.fixture(scope="session")
def perfect_corpus(perfect_spec):
    return generate(perfect_spec)


@pytest.fixture(scope="session")
def perfect_pipeline(perfect_spec, perfect_corpus):
    config = small_engine_config(perfect_spec)
    return build_pipeline(perfect_corpus.images, perfect_corpus.descriptors, config)


@pytest.fixture(scope="session")
def small_config():
    return small_engine_config
