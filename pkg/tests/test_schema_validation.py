import numpy as np
import pytest

from c2f_retrieval.codebook import Codebook
from c2f_retrieval.pipeline import C2FPipeline
from c2f_retrieval.validation import StoreSchemaValidator, StoreValidationError


def _stores(pipeline):
    return dict(
        histograms=pipeline.histograms,
        descriptors=pipeline.descriptors,
        codebook=pipeline.codebook,
        he=pipeline.he,
        index=pipeline.index,
    )


def test_store_validation_passes(perfect_pipeline, logger):
    validator = StoreSchemaValidator(logger=logger)
    validator.validate(**_stores(perfect_pipeline))


def test_store_validation_fails_on_codebook_size(perfect_pipeline, logger):
    stores = _stores(perfect_pipeline)
    stores["codebook"] = Codebook(centroids=perfect_pipeline.codebook.centroids[:-1])
    validator = StoreSchemaValidator(logger=logger)

    with pytest.raises(StoreValidationError):
        validator.validate(**stores)


def test_store_validation_fails_on_descriptor_dimension(perfect_pipeline, logger):
    stores = _stores(perfect_pipeline)
    stores["codebook"] = Codebook(centroids=np.zeros((perfect_pipeline.codebook.k, 3)))
    validator = StoreSchemaValidator(logger=logger)

    with pytest.raises(StoreValidationError):
        validator.validate(descriptors=stores["descriptors"], codebook=stores["codebook"])


def test_pipeline_refuses_mismatched_stores(perfect_pipeline):
    with pytest.raises(StoreValidationError):
        C2FPipeline(
            histograms=perfect_pipeline.histograms,
            codebook=Codebook(centroids=perfect_pipeline.codebook.centroids[:-1]),
            he=perfect_pipeline.he,
            index=perfect_pipeline.index,
        )


def test_fingerprint_mismatch_is_reported(logger):
    validator = StoreSchemaValidator(logger=logger)
    validator.validate_fingerprints("abc", {"codebook": "abc"})

    with pytest.raises(StoreValidationError, match="index"):
        validator.validate_fingerprints("abc", {"codebook": "abc", "index": "def"})
