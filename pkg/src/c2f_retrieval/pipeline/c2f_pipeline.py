from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from c2f_retrieval.codebook import Codebook, DescriptorSet, multi_assign_matrix, root_preprocess_matrix
from c2f_retrieval.embedding import HeParameters, sign_matrix
from c2f_retrieval.holistic import (
    HistogramStore,
    HolisticScoreList,
    HsvHistogram,
    ParameterError,
    PixelImage,
    filter_top_k,
    hsv_histogram,
    normalize_histogram,
)
from c2f_retrieval.index import TF_MODES, FeatureBatch, InvertedIndex, LocalScoreMap, score_candidates
from c2f_retrieval.logging import get_logger
from c2f_retrieval.validation import StoreSchemaValidator, StoreValidationError
from c2f_retrieval.weighting import WeightedCandidateSet, make_weights, uniform_weights

MODES = ("c2f", "holistic", "bow")


class FusionError(ValueError):
    """Raised when local scores and weights do not describe the same candidates."""


@dataclass(frozen=True)
class PipelineConfig:
    """
    Parameters of one retrieval run.

    ``hsv_dims``, ``k`` and ``d_b`` must describe the loaded stores;
    ``h_t`` and ``sigma`` may differ from the build and apply to this run.
    ``alpha`` is used for query histograms computed from images.
    """

    K: int = 1000
    alpha: float = 0.5
    hsv_dims: Tuple[int, int, int] = (20, 10, 5)
    k: int = 20000
    d_b: int = 128
    h_t: int = 52
    sigma: float = 26.0
    ma: int = 3
    weights_enabled: bool = True
    normalization_enabled: bool = True
    tf_mode: str = "occurrence"
    mode: str = "c2f"

    def __post_init__(self):
        object.__setattr__(self, "hsv_dims", tuple(int(d) for d in self.hsv_dims))
        if self.K < 1:
            raise ParameterError(f"candidate count K must be >= 1, got {self.K}")
        if not 0 < self.alpha <= 1:
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.ma < 1:
            raise ParameterError(f"multiple assignment ma must be >= 1, got {self.ma}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.tf_mode not in TF_MODES:
            raise ParameterError(f"tf_mode must be one of {TF_MODES}, got {self.tf_mode!r}")
        if not 0 <= self.h_t <= self.d_b:
            raise ParameterError(f"h_t must lie in [0, d_b={self.d_b}], got {self.h_t}")
        if self.sigma <= 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class RankEntry:
    image_id: int
    final: float
    local: float
    weight: float
    holistic: float

    def as_tuple(self) -> Tuple[int, float, float, float, float]:
        return (self.image_id, self.final, self.local, self.weight, self.holistic)


@dataclass(frozen=True)
class RankList:
    """
    Final ranking of one query.

    Entries are sorted by descending final score, then descending
    holistic score, then ascending image id.
    """

    query_id: Optional[int]
    entries: Tuple[RankEntry, ...]
    comparison_count: int
    holistic_comparisons: int = 0
    local_comparisons: int = 0
    candidates: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def image_ids(self) -> List[int]:
        return [e.image_id for e in self.entries]

    def to_record(self) -> Dict[str, Any]:
        return {
            "query_id": self.query_id,
            "comparison_count": self.comparison_count,
            "holistic_comparisons": self.holistic_comparisons,
            "local_comparisons": self.local_comparisons,
            "candidates": self.candidates,
            "entries": [
                {
                    "image_id": e.image_id,
                    "final": _finite_or_none(e.final),
                    "local": e.local,
                    "weight": e.weight,
                    "holistic": e.holistic,
                }
                for e in self.entries
            ],
        }


def _finite_or_none(value: float) -> Optional[float]:
    return value if np.isfinite(value) else None


def _sorted_entries(entries: List[RankEntry]) -> List[RankEntry]:
    return sorted(entries, key=lambda e: (-e.final, -e.holistic, e.image_id))


def fuse_scores(local: LocalScoreMap, weights: WeightedCandidateSet) -> List[RankEntry]:
    """
    Final score of every weighted candidate: local score times weight.

    Candidates without a local match keep ``s^L = 0`` and therefore
    ``s^F = 0``; they sort among themselves by holistic score.
    """
    known = set(int(i) for i in weights.image_ids)
    missing = sorted(set(local.scores) - known)
    if missing:
        raise FusionError(f"local scores for ids without a weight: {missing[:10]}")
    entries = []
    for image_id, holistic, weight in weights.entries:
        score = local.get(image_id)
        entries.append(
            RankEntry(
                image_id=image_id,
                final=score * weight,
                local=score,
                weight=weight,
                holistic=holistic,
            )
        )
    return _sorted_entries(entries)


def encode_query(
    values: np.ndarray,
    codebook: Codebook,
    he: HeParameters,
    ma: int = 3,
    image_id: int = 0,
    logger=None,
) -> FeatureBatch:
    """
    Quantise and sign raw query descriptors with multiple assignment.

    Every descriptor yields ``ma`` rows, one per assigned word, each
    signed against the thresholds of that word.
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1, codebook.dim)
    if values.shape[0] == 0:
        return FeatureBatch(
            image_ids=np.empty(0, dtype=np.uint32),
            words=np.empty(0, dtype=np.int64),
            signatures=np.empty((0, 0), dtype=np.uint8),
            k=codebook.k,
            d_b=he.d_b,
        )
    prepared = root_preprocess_matrix(values)
    assigned = multi_assign_matrix(prepared, codebook, ma, logger=logger)
    m = assigned.shape[1]
    rows = np.repeat(prepared, m, axis=0)
    words = assigned.reshape(-1)
    return FeatureBatch(
        image_ids=np.full(words.size, image_id, dtype=np.uint32),
        words=words,
        signatures=sign_matrix(rows, words, he),
        k=codebook.k,
        d_b=he.d_b,
    )


class C2FPipeline:
    """
    Coarse-to-fine retrieval over one built corpus.

    Purpose
    -------
    Filter the database with holistic colour histograms, weight the
    surviving candidates, refine them with local feature matching and
    fuse both signals into the final ranking.
    """

    def __init__(
        self,
        histograms: HistogramStore,
        codebook: Codebook,
        he: HeParameters,
        index: InvertedIndex,
        config: Optional[PipelineConfig] = None,
        descriptors: Optional[DescriptorSet] = None,
        validate_stores: bool = True,
        logger=None,
    ):
        """
        Initialize the pipeline.

        Parameters
        ----------
        histograms : HistogramStore
            Normalised holistic histograms of the database.
        codebook, he, index :
            Local layer stores built from the same corpus.
        config : PipelineConfig, optional
            Defaults to the dimensions and matching parameters of the
            stores. A config whose ``hsv_dims``, ``k`` or ``d_b`` disagree
            with the stores raises ``StoreValidationError``.
        descriptors : DescriptorSet, optional
            Raw database descriptors; needed to query by image id.
        validate_stores : bool, default=True
            Check that all stores agree on dimensions before querying.
        logger :
            Optional Loguru logger instance. If None, a default
            package logger is created and used.
        """
        self.logger = logger or get_logger(self.__class__.__name__)
        self.histograms = histograms
        self.codebook = codebook
        self.he = he
        self.index = index
        self.descriptors = descriptors
        self.config = config or PipelineConfig(
            hsv_dims=histograms.dims,
            k=codebook.k,
            d_b=he.d_b,
            h_t=index.config.h_t,
            sigma=index.config.sigma,
        )
        self._check_config()
        if validate_stores:
            StoreSchemaValidator(logger=self.logger).validate_dimensions(
                histograms=histograms,
                descriptors=descriptors,
                codebook=codebook,
                he=he,
                index=index,
            )

    def _check_config(self) -> None:
        stored = {"hsv_dims": self.histograms.dims, "k": self.codebook.k, "d_b": self.he.d_b}
        differing = {
            name: (getattr(self.config, name), value)
            for name, value in stored.items()
            if getattr(self.config, name) != value
        }
        if differing:
            message = "run config disagrees with the loaded stores: " + ", ".join(
                f"{name}={ours} (stores: {theirs})" for name, (ours, theirs) in differing.items()
            )
            self.logger.error(message)
            raise StoreValidationError(message)

    @property
    def n_images(self) -> int:
        return len(self.histograms)

    def with_config(self, **changes: Any) -> "C2FPipeline":
        """A pipeline over the same stores with some run parameters replaced."""
        return C2FPipeline(
            histograms=self.histograms,
            codebook=self.codebook,
            he=self.he,
            index=self.index,
            config=replace(self.config, **changes),
            descriptors=self.descriptors,
            validate_stores=False,
            logger=self.logger,
        )

    def _check_query_id(self, query_id: int) -> None:
        if not 0 <= query_id < self.n_images:
            message = f"unknown query id {query_id} (corpus holds {self.n_images} images)"
            self.logger.error(message)
            raise ParameterError(message)

    def query_histogram(self, image: PixelImage) -> HsvHistogram:
        """Normalised histogram of a query image under this run's dims and alpha."""
        return normalize_histogram(hsv_histogram(image, self.config.hsv_dims), self.config.alpha)

    def query_features(self, query_id: int) -> FeatureBatch:
        """Multiple-assigned, signed features of a database image used as query."""
        self._check_query_id(query_id)
        if self.descriptors is None:
            raise ParameterError("querying by id needs the descriptor store")
        return encode_query(
            self.descriptors.for_image(query_id),
            self.codebook,
            self.he,
            ma=self.config.ma,
            image_id=query_id,
            logger=self.logger,
        )

    def run_query(
        self,
        query_id: Optional[int] = None,
        histogram: Optional[HsvHistogram] = None,
        features: Optional[FeatureBatch] = None,
        full_depth: bool = False,
    ) -> RankList:
        """
        Rank the database for one query.

        Parameters
        ----------
        query_id : int, optional
            Database image used as query; its stored histogram and
            descriptors are used unless given explicitly.
        histogram : HsvHistogram, optional
            Normalised query histogram.
        features : FeatureBatch, optional
            Query features, already multiple-assigned and signed.
        full_depth : bool, default=False
            Append every image outside the candidate set, in holistic
            order, with final score ``-inf``.

        Returns
        -------
        RankList
        """
        if query_id is not None:
            self._check_query_id(query_id)
            if histogram is None:
                histogram = self.histograms.histogram(query_id)
            if features is None and self.config.mode != "holistic":
                features = self.query_features(query_id)
        if histogram is None:
            raise ParameterError("a query needs an id or a histogram")
        if features is None and self.config.mode != "holistic":
            raise ParameterError("a query needs an id or local features")

        # --------------------------------------------------
        # Step 1: Holistic ranking of the whole database
        # --------------------------------------------------
        holistic = self.histograms.rank(histogram)
        n = len(holistic)

        if self.config.mode == "holistic":
            depth = n if full_depth else min(self.config.K, n)
            entries = tuple(
                RankEntry(image_id=i, final=s, local=0.0, weight=1.0, holistic=s)
                for i, s in holistic.entries[:depth]
            )
            return RankList(
                query_id=query_id,
                entries=entries,
                comparison_count=n,
                holistic_comparisons=n,
                local_comparisons=0,
                candidates=min(self.config.K, n),
            )

        # --------------------------------------------------
        # Step 2: Candidate filter
        # --------------------------------------------------
        k_eff = n if self.config.mode == "bow" else self.config.K
        if k_eff > n:
            self.logger.warning(f"K={k_eff} exceeds database size {n}; clamped.")
            k_eff = n
        top = filter_top_k(holistic, k_eff, logger=self.logger)

        # --------------------------------------------------
        # Step 3: Adaptive weights
        # --------------------------------------------------
        if self.config.weights_enabled and self.config.mode == "c2f":
            weights = make_weights(top, query_id=query_id, logger=self.logger)
        else:
            weights = uniform_weights(top, query_id=query_id)

        # --------------------------------------------------
        # Step 4: Local refinement of the candidates
        # --------------------------------------------------
        local = score_candidates(
            features,
            self.index,
            top.image_ids,
            normalize=self.config.normalization_enabled,
            tf_mode=self.config.tf_mode,
            h_t=self.config.h_t,
            sigma=self.config.sigma,
        )

        # --------------------------------------------------
        # Step 5: Fusion
        # --------------------------------------------------
        entries = fuse_scores(local, weights)
        if full_depth:
            entries.extend(self._tail(holistic, len(top)))

        return RankList(
            query_id=query_id,
            entries=tuple(entries),
            comparison_count=n + local.comparisons,
            holistic_comparisons=n,
            local_comparisons=local.comparisons,
            candidates=len(top),
        )

    @staticmethod
    def _tail(holistic: HolisticScoreList, start: int) -> List[RankEntry]:
        return [
            RankEntry(image_id=i, final=float("-inf"), local=0.0, weight=0.0, holistic=s)
            for i, s in holistic.entries[start:]
        ]

    def run_batch(
        self,
        query_ids: Sequence[int],
        full_depth: bool = False,
        workers: int = 1,
    ) -> List[RankList]:
        """Run many queries against the shared stores; results keep input order."""
        self.logger.info(f"Running {len(query_ids)} queries (mode={self.config.mode}, K={self.config.K})...")
        def run(query_id):
            return self.run_query(query_id=int(query_id), full_depth=full_depth)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run, query_ids))
        else:
            results = [run(q) for q in query_ids]
        self.logger.info(f"Batch completed: {len(results)} rankings.")
        return results
