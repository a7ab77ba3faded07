from typing import Mapping, Optional

from c2f_retrieval.codebook import Codebook, DescriptorSet
from c2f_retrieval.embedding import HeParameters
from c2f_retrieval.holistic import HistogramStore
from c2f_retrieval.index import InvertedIndex
from c2f_retrieval.logging import get_logger


class StoreValidationError(ValueError):
    """Raised when stores used together disagree on corpus or dimensions."""
    pass


class StoreSchemaValidator:
    """
    Validate that a set of stores was built from one corpus and one configuration.

    Purpose
    -------
    Detect mismatched store files early, before a query silently mixes a
    codebook with an index trained on something else.
    """

    def __init__(self, logger=None):
        self.logger = logger or get_logger(self.__class__.__name__)

    def _fail(self, message: str) -> None:
        self.logger.error(message)
        raise StoreValidationError(message)

    def validate_dimensions(
        self,
        histograms: Optional[HistogramStore] = None,
        descriptors: Optional[DescriptorSet] = None,
        codebook: Optional[Codebook] = None,
        he: Optional[HeParameters] = None,
        index: Optional[InvertedIndex] = None,
    ) -> None:
        if descriptors is not None and codebook is not None and descriptors.dim != codebook.dim:
            self._fail(f"descriptor D={descriptors.dim} but codebook D={codebook.dim}")
        if codebook is not None and he is not None:
            if he.dim != codebook.dim:
                self._fail(f"HE projection D={he.dim} but codebook D={codebook.dim}")
            if he.k != codebook.k:
                self._fail(f"HE thresholds cover k={he.k} words, codebook has k={codebook.k}")
        if index is not None:
            if codebook is not None and index.config.k != codebook.k:
                self._fail(f"index built for k={index.config.k}, codebook has k={codebook.k}")
            if he is not None and index.config.d_b != he.d_b:
                self._fail(f"index stores d_b={index.config.d_b}, HE produces d_b={he.d_b}")
            if histograms is not None and index.n_images != len(histograms):
                self._fail(
                    f"index holds {index.n_images} images, histogram store {len(histograms)}"
                )
        if histograms is not None and descriptors is not None and len(descriptors):
            highest = int(descriptors.image_ids.max())
            if highest >= len(histograms):
                self._fail(
                    f"descriptor owned by image {highest}, corpus has {len(histograms)} images"
                )

    def validate_fingerprints(self, expected: str, found: Mapping[str, str]) -> None:
        mismatched = sorted(name for name, value in found.items() if value != expected)
        if mismatched:
            self._fail(f"corpus fingerprint mismatch for: {mismatched}")

    def validate(self, **stores) -> None:
        """
        Run all dimension checks on the given stores.

        Raises
        ------
        StoreValidationError
            If any two stores disagree.
        """
        self.logger.info("Validating store consistency...")
        self.validate_dimensions(**stores)
        self.logger.info("Store validation completed successfully.")
