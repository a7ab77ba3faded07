"""Inverted file over quantised features and candidate-restricted local scoring."""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from c2f_retrieval.codebook.kmeans import as_float32_grid
from c2f_retrieval.embedding.signature import hamming_packed, packed_width
from c2f_retrieval.index.features import FeatureBatch
from c2f_retrieval.logging import get_logger

TF_MODES = ("occurrence", "word")


class IndexBuildError(ValueError):
    """Raised when an index cannot be built (empty database, foreign features)."""


class IndexConfigError(ValueError):
    """Raised when query features do not match the index configuration."""


@dataclass(frozen=True)
class IndexConfig:
    """Codebook size, signature length, Hamming threshold and Gaussian bandwidth."""

    k: int
    d_b: int = 128
    h_t: int = 52
    sigma: float = 26.0

    def __post_init__(self):
        if self.k < 1 or self.d_b < 1:
            raise IndexConfigError(f"k and d_b must be >= 1, got k={self.k}, d_b={self.d_b}")
        if not 0 <= self.h_t <= self.d_b:
            raise IndexConfigError(f"h_t must lie in [0, d_b={self.d_b}], got {self.h_t}")
        if self.sigma <= 0:
            raise IndexConfigError(f"sigma must be positive, got {self.sigma}")
        # sigma is stored as float32 on disk
        object.__setattr__(self, "sigma", float(np.float32(self.sigma)))


class InvertedIndex:
    """
    Per-word posting lists in compressed-sparse-row layout.

    Postings of word ``w`` occupy rows ``offsets[w]:offsets[w + 1]`` of
    ``posting_images`` / ``posting_signatures`` and are sorted by image id.
    Signatures are stored inline next to the image id.
    """

    def __init__(
        self,
        offsets: np.ndarray,
        posting_images: np.ndarray,
        posting_signatures: np.ndarray,
        idf: np.ndarray,
        image_norms: np.ndarray,
        config: IndexConfig,
        flagged_images: Tuple[int, ...] = (),
    ):
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.posting_images = np.asarray(posting_images, dtype=np.uint32)
        self.posting_signatures = np.asarray(posting_signatures, dtype=np.uint8).reshape(
            -1, packed_width(config.d_b)
        )
        self.idf = as_float32_grid(idf)
        self.image_norms = as_float32_grid(image_norms)
        self.config = config
        self.flagged_images = tuple(int(i) for i in flagged_images)
        for array in (
            self.offsets,
            self.posting_images,
            self.posting_signatures,
            self.idf,
            self.image_norms,
        ):
            array.setflags(write=False)

    @property
    def n_images(self) -> int:
        return int(self.image_norms.size)

    @property
    def n_postings(self) -> int:
        return int(self.posting_images.size)

    def postings(self, word: int) -> Tuple[np.ndarray, np.ndarray]:
        lo, hi = self.offsets[word], self.offsets[word + 1]
        return self.posting_images[lo:hi], self.posting_signatures[lo:hi]


@dataclass
class LocalScoreMap:
    """
    ``s^L`` of the candidates that matched at least once.

    Absent candidates have ``s^L = 0``. ``comparisons`` counts the posting
    entries examined.
    """

    scores: Dict[int, float] = field(default_factory=dict)
    comparisons: int = 0

    def get(self, image_id: int, default: float = 0.0) -> float:
        return self.scores.get(image_id, default)

    def __contains__(self, image_id: int) -> bool:
        return image_id in self.scores

    def __len__(self) -> int:
        return len(self.scores)


def compute_idf(words: np.ndarray, image_ids: np.ndarray, k: int, n_images: int) -> np.ndarray:
    """``ln(N / n_w)`` with ``n_w`` the number of distinct images holding word w."""
    if words.size == 0:
        return np.zeros(k, dtype=np.float64)
    pairs = np.unique(np.stack([words.astype(np.int64), image_ids.astype(np.int64)]), axis=1)
    document_frequency = np.bincount(pairs[0], minlength=k)
    idf = np.zeros(k, dtype=np.float64)
    used = document_frequency > 0
    idf[used] = np.log(n_images / document_frequency[used])
    return as_float32_grid(idf)


def build_index(
    features: FeatureBatch,
    n_images: int,
    config: IndexConfig,
    logger=None,
) -> InvertedIndex:
    """
    Build the inverted index of a database.

    Parameters
    ----------
    features : FeatureBatch
        Every database feature, single-assigned and signed.
    n_images : int
        Database size N; images without features are still indexed.
    config : IndexConfig
        Must agree with the batch's ``k`` and ``d_b``.
    logger :
        Optional Loguru logger instance.

    Returns
    -------
    InvertedIndex
        Postings sorted by image id within each word; image norms are the
        l2 norm of the idf values of the image's features, or 1 for images
        whose norm would be zero (recorded in ``flagged_images``).
    """
    logger = logger or get_logger("inverted-index")
    if n_images < 1:
        message = "cannot index an empty database"
        logger.error(message)
        raise IndexBuildError(message)
    if features.k != config.k or features.d_b != config.d_b:
        raise IndexBuildError(
            f"features quantised with k={features.k}, d_b={features.d_b}; "
            f"index configured for k={config.k}, d_b={config.d_b}"
        )
    if len(features) and int(features.image_ids.max()) >= n_images:
        raise IndexBuildError(
            f"feature owned by image {int(features.image_ids.max())} "
            f"but the database holds {n_images} images"
        )

    logger.info(f"Building inverted index: {len(features)} features, {n_images} images, k={config.k}")
    order = np.lexsort((features.image_ids, features.words))
    words = features.words[order]
    images = features.image_ids[order]
    signatures = features.signatures[order]

    offsets = np.zeros(config.k + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(np.bincount(words, minlength=config.k))

    idf = compute_idf(words, images, config.k, n_images)
    mass = np.bincount(images, weights=idf[words] ** 2, minlength=n_images)
    norms = np.sqrt(mass)
    flagged = np.flatnonzero(norms == 0)
    if flagged.size:
        logger.warning(
            f"{flagged.size} image(s) have no informative features, norm set to 1: "
            f"{flagged[:10].tolist()}{'...' if flagged.size > 10 else ''}"
        )
        norms[flagged] = 1.0

    index = InvertedIndex(
        offsets=offsets,
        posting_images=images,
        posting_signatures=signatures,
        idf=idf,
        image_norms=norms,
        config=config,
        flagged_images=tuple(flagged.tolist()),
    )
    logger.info(f"Inverted index built: {index.n_postings} postings.")
    return index


def _candidate_rows(posting_images: np.ndarray, candidates: np.ndarray):
    """Row offsets (within one posting list) of candidate images, and their candidate slot."""
    left = np.searchsorted(posting_images, candidates, side="left")
    right = np.searchsorted(posting_images, candidates, side="right")
    counts = right - left
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    slots = np.repeat(np.arange(candidates.size), counts)
    run_starts = np.repeat(np.cumsum(counts) - counts, counts)
    rows = np.repeat(left, counts) + (np.arange(total) - run_starts)
    return rows, slots


def score_candidates(
    query: FeatureBatch,
    idx: InvertedIndex,
    candidates: Iterable[int],
    normalize: bool = True,
    tf_mode: str = "occurrence",
    h_t: Optional[int] = None,
    sigma: Optional[float] = None,
) -> LocalScoreMap:
    """
    Local similarity of the query to each candidate image.

    Every query assignment is compared with the postings of its word that
    belong to a candidate; a pair within ``h_t`` adds
    ``idf(word)^2 * exp(-h^2 / sigma^2)``. Postings of other images are
    never read.

    Parameters
    ----------
    query : FeatureBatch
        Query assignments (multiple assignment rows included).
    idx : InvertedIndex
    candidates : iterable of int
        Image ids to score.
    normalize : bool, default=True
        Divide by the candidate's idf norm; ``False`` gives the raw sum.
    tf_mode : {"occurrence", "word"}, default="occurrence"
        ``"occurrence"`` counts every matching feature pair;
        ``"word"`` lets each (query word, image) pair contribute once,
        with its best match.
    h_t, sigma : optional
        Hamming threshold and Gaussian bandwidth for this call; default to
        the values the index was built with.

    Returns
    -------
    LocalScoreMap
    """
    if query.k != idx.config.k or query.d_b != idx.config.d_b:
        raise IndexConfigError(
            f"query quantised with k={query.k}, d_b={query.d_b}; "
            f"index built with k={idx.config.k}, d_b={idx.config.d_b}"
        )
    if tf_mode not in TF_MODES:
        raise IndexConfigError(f"tf_mode must be one of {TF_MODES}, got {tf_mode!r}")
    h_t = idx.config.h_t if h_t is None else int(h_t)
    sigma = idx.config.sigma if sigma is None else float(np.float32(sigma))
    if not 0 <= h_t <= idx.config.d_b:
        raise IndexConfigError(f"h_t must lie in [0, d_b={idx.config.d_b}], got {h_t}")
    if sigma <= 0:
        raise IndexConfigError(f"sigma must be positive, got {sigma}")

    cand = np.unique(np.fromiter((int(c) for c in candidates), dtype=np.int64))
    cand = cand[(cand >= 0) & (cand < idx.n_images)]
    accumulator = np.zeros(cand.size, dtype=np.float64)
    matched = np.zeros(cand.size, dtype=bool)
    comparisons = 0
    sigma_sq = sigma ** 2

    order = np.argsort(query.words, kind="stable")
    words, starts = np.unique(query.words[order], return_index=True)
    for word, group in zip(words, np.split(order, starts[1:])):
        posting_images, posting_signatures = idx.postings(int(word))
        rows, slots = _candidate_rows(posting_images.astype(np.int64), cand)
        if rows.size == 0:
            continue
        comparisons += int(rows.size)

        distances = hamming_packed(
            query.signatures[group][:, None, :], posting_signatures[rows][None, :, :]
        )
        within = distances <= h_t
        if not within.any():
            continue
        contribution = np.where(
            within,
            idx.idf[word] ** 2 * np.exp(-(distances.astype(np.float64) ** 2) / sigma_sq),
            0.0,
        )
        hit = within.any(axis=0)
        matched[slots[hit]] = True
        if tf_mode == "occurrence":
            accumulator += np.bincount(slots, weights=contribution.sum(axis=0), minlength=cand.size)
        else:
            best = np.zeros(cand.size, dtype=np.float64)
            np.maximum.at(best, slots, contribution.max(axis=0))
            accumulator += best

    if normalize:
        accumulator = accumulator / idx.image_norms[cand]
    scores = {
        int(image_id): float(score)
        for image_id, score, hit in zip(cand, accumulator, matched)
        if hit and score > 0.0
    }
    return LocalScoreMap(scores=scores, comparisons=comparisons)
