"""Seeded synthetic corpora with planted colour palettes and visual-word patterns."""

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from matplotlib.colors import hsv_to_rgb

from c2f_retrieval.codebook import DescriptorSet
from c2f_retrieval.evaluation.ground_truth import GroundTruth, resolve_protocol, write_ground_truth
from c2f_retrieval.holistic import PixelImage, encode_ppm
from c2f_retrieval.holistic.histogram import hsv_bin_indices
from c2f_retrieval.logging import get_logger

KINDS = ("group", "palette_confuser", "word_confuser", "distractor")


class SynthSpecError(ValueError):
    """Raised for an invalid synthetic corpus specification."""


@dataclass(frozen=True)
class SynthSpec:
    """
    Shape of a synthetic corpus.

    ``separation`` is the share of each planted image's pixels drawn from
    its group palette (the rest come from a background palette shared by
    every planted image); 1 makes groups colour-disjoint. ``noise`` is
    the standard deviation of the Gaussian perturbation added to every
    descriptor around its cluster centre.
    """

    n_groups: int = 4
    group_size: int = 4
    n_distractors: int = 0
    seed: int = 0
    separation: float = 1.0
    noise: float = 0.0
    image_size: int = 16
    palette_size: int = 3
    descriptors_per_image: int = 24
    dim: int = 32
    words_per_group: int = 4
    distractor_words: int = 4
    palette_confusers: int = 0
    word_confusers: int = 0
    shared_palette: bool = False
    hsv_dims: Tuple[int, int, int] = (20, 10, 5)
    protocol: str = "holidays"

    def __post_init__(self):
        object.__setattr__(self, "hsv_dims", tuple(int(d) for d in self.hsv_dims))
        object.__setattr__(self, "protocol", resolve_protocol(self.protocol))
        for name in ("n_distractors", "palette_confusers", "word_confusers"):
            if getattr(self, name) < 0:
                raise SynthSpecError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in (
            "n_groups",
            "image_size",
            "palette_size",
            "descriptors_per_image",
            "words_per_group",
            "distractor_words",
        ):
            if getattr(self, name) < 1:
                raise SynthSpecError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.group_size < 2:
            raise SynthSpecError(f"group_size must be >= 2, got {self.group_size}")
        if self.dim < 2:
            raise SynthSpecError(f"dim must be >= 2, got {self.dim}")
        if not 0.0 <= self.separation <= 1.0:
            raise SynthSpecError(f"separation must lie in [0, 1], got {self.separation}")
        if self.noise < 0:
            raise SynthSpecError(f"noise must be >= 0, got {self.noise}")

    @property
    def n_planted(self) -> int:
        return self.n_groups * self.group_size

    @property
    def n_images(self) -> int:
        return self.n_planted + self.palette_confusers + self.word_confusers + self.n_distractors

    @property
    def uses_distractor_words(self) -> bool:
        return self.n_distractors + self.palette_confusers > 0

    @property
    def n_words(self) -> int:
        """Distinct cluster centres the descriptors are drawn around."""
        planted = self.n_groups * self.words_per_group
        return planted + (self.distractor_words if self.uses_distractor_words else 0)

    def with_distractors(self, count: int) -> "SynthSpec":
        return replace(self, n_distractors=int(count))


@dataclass(frozen=True)
class SyntheticCorpus:
    spec: SynthSpec
    images: List[PixelImage]
    descriptors: DescriptorSet
    groups: List[List[int]]
    kinds: List[str]

    @property
    def n_images(self) -> int:
        return len(self.images)

    @property
    def ground_truth(self) -> GroundTruth:
        return GroundTruth.from_groups(self.groups, protocol=self.spec.protocol)

    def paths(self) -> List[str]:
        return [f"images/{i:05d}.ppm" for i in range(self.n_images)]


def palette_colours(dims: Sequence[int]) -> np.ndarray:
    """
    One RGB colour per usable HSV bin, in bin order.

    Colours are bin centres with saturation and value away from the
    achromatic bins, kept only when the rounded RGB colour falls back
    into the bin it was taken from.
    """
    h_bins, s_bins, v_bins = (int(d) for d in dims)
    s_low = min(2, s_bins - 1)
    v_low = min(2, v_bins - 1)
    hi, si, vi = np.meshgrid(
        np.arange(h_bins), np.arange(s_low, s_bins), np.arange(v_low, v_bins), indexing="ij"
    )
    hi, si, vi = hi.reshape(-1), si.reshape(-1), vi.reshape(-1)
    hsv = np.stack([(hi + 0.5) / h_bins, (si + 0.5) / s_bins, (vi + 0.5) / v_bins], axis=1)
    rgb = np.round(hsv_to_rgb(hsv) * 255.0).astype(np.uint8)
    intended = hi * s_bins * v_bins + si * v_bins + vi
    landed = hsv_bin_indices(rgb, (h_bins, s_bins, v_bins))
    return rgb[landed == intended]


def _cluster_centres(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    support = max(2, dim // 4)
    centres = np.zeros((count, dim), dtype=np.float64)
    for row in centres:
        chosen = rng.choice(dim, size=support, replace=False)
        row[chosen] = rng.uniform(0.5, 1.0, size=support)
    return centres


class _Builder:
    """Accumulates images and descriptors in id order."""

    def __init__(self, spec: SynthSpec, rng: np.random.Generator, centres: np.ndarray):
        self.spec = spec
        self.rng = rng
        self.centres = centres
        self.images: List[PixelImage] = []
        self.kinds: List[str] = []
        self.ids: List[np.ndarray] = []
        self.values: List[np.ndarray] = []
        self.keypoints: List[np.ndarray] = []

    def image(self, palette: np.ndarray, proportions: np.ndarray, background: np.ndarray = None) -> PixelImage:
        size = self.spec.image_size
        count = size * size
        pixels = palette[self.rng.choice(len(palette), size=count, p=proportions)]
        if background is not None:
            mixed = self.rng.random(count) >= self.spec.separation
            pixels[mixed] = background[self.rng.integers(len(background), size=int(mixed.sum()))]
        return PixelImage(width=size, height=size, pixels=pixels.reshape(size, size, 3))

    def descriptors(self, words: np.ndarray) -> np.ndarray:
        base = self.centres[words]
        values = base + self.spec.noise * self.rng.standard_normal(base.shape)
        values = np.clip(values, 0.0, None)
        empty = values.sum(axis=1) == 0
        values[empty] = base[empty]
        return values

    def add(self, kind: str, image: PixelImage, words: np.ndarray) -> int:
        image_id = len(self.images)
        n = words.size
        self.images.append(image)
        self.kinds.append(kind)
        self.ids.append(np.full(n, image_id, dtype=np.uint32))
        self.values.append(self.descriptors(words))
        size = self.spec.image_size
        self.keypoints.append(
            np.column_stack(
                [
                    self.rng.uniform(0, size, size=n),
                    self.rng.uniform(0, size, size=n),
                    self.rng.uniform(1.0, 4.0, size=n),
                ]
            )
        )
        return image_id

    def descriptor_set(self) -> DescriptorSet:
        return DescriptorSet(
            image_ids=np.concatenate(self.ids),
            values=np.concatenate(self.values),
            keypoints=np.concatenate(self.keypoints),
        )


def generate(spec: SynthSpec, logger=None) -> SyntheticCorpus:
    """
    Generate a corpus from a spec; identical specs give identical corpora.

    Image ids are assigned in this order: planted groups (group by
    group), palette confusers, word confusers, distractors. The planted
    part depends only on the seed and the planted parameters, not on
    how many confusers or distractors follow.

    Parameters
    ----------
    spec : SynthSpec
    logger :
        Optional Loguru logger instance.

    Returns
    -------
    SyntheticCorpus
    """
    logger = logger or get_logger("synthgen")
    rng = np.random.default_rng(spec.seed)
    p = spec.palette_size

    colours = palette_colours(spec.hsv_dims)
    group_palettes = 1 if spec.shared_palette else spec.n_groups
    needed = (group_palettes + 2) * p
    if colours.shape[0] < needed:
        raise SynthSpecError(
            f"{colours.shape[0]} usable colours for hsv_dims={spec.hsv_dims}, need {needed}"
        )
    colours = colours[rng.permutation(colours.shape[0])]
    palettes = [colours[g * p:(g + 1) * p] for g in range(group_palettes)]
    if spec.shared_palette:
        palettes = palettes * spec.n_groups
    background = colours[group_palettes * p:(group_palettes + 1) * p]
    pool = colours[(group_palettes + 1) * p:]

    planted_words = spec.n_groups * spec.words_per_group
    centres = _cluster_centres(rng, planted_words + spec.distractor_words, spec.dim)
    group_words = [
        np.arange(g * spec.words_per_group, (g + 1) * spec.words_per_group)
        for g in range(spec.n_groups)
    ]
    distractor_words = np.arange(planted_words, planted_words + spec.distractor_words)
    per_image = spec.descriptors_per_image
    builder = _Builder(spec, rng, centres)
    mixing = background if spec.separation < 1.0 else None

    groups: List[List[int]] = []
    for g in range(spec.n_groups):
        proportions = rng.dirichlet(np.full(p, 4.0))
        words = group_words[g][np.arange(per_image) % spec.words_per_group]
        groups.append(
            [
                builder.add("group", builder.image(palettes[g], proportions, mixing), words)
                for _ in range(spec.group_size)
            ]
        )

    for c in range(spec.palette_confusers):
        g = c % spec.n_groups
        image = builder.image(palettes[g], rng.dirichlet(np.full(p, 4.0)), mixing)
        builder.add("palette_confuser", image, rng.choice(distractor_words, size=per_image))

    for c in range(spec.word_confusers):
        g = c % spec.n_groups
        palette = pool[rng.choice(len(pool), size=p, replace=False)]
        words = group_words[g][np.arange(2 * per_image) % spec.words_per_group]
        builder.add("word_confuser", builder.image(palette, rng.dirichlet(np.full(p, 4.0))), words)

    for _ in range(spec.n_distractors):
        palette = pool[rng.choice(len(pool), size=p, replace=False)]
        image = builder.image(palette, rng.dirichlet(np.full(p, 4.0)))
        builder.add("distractor", image, rng.choice(distractor_words, size=per_image))

    logger.info(
        f"Generated synthetic corpus: {spec.n_groups} groups x {spec.group_size}, "
        f"{spec.palette_confusers + spec.word_confusers} confusers, "
        f"{spec.n_distractors} distractors (seed={spec.seed})"
    )
    return SyntheticCorpus(
        spec=spec,
        images=builder.images,
        descriptors=builder.descriptor_set(),
        groups=groups,
        kinds=builder.kinds,
    )


def write_corpus(corpus: SyntheticCorpus, directory: Union[str, Path]) -> Dict[str, Path]:
    """Write ``images/*.ppm``, ``descriptors.c2fd`` and ``groundtruth.txt`` under ``directory``."""
    directory = Path(directory)
    image_dir = directory / "images"
    image_dir.mkdir(parents=True, exist_ok=True)
    for relative, image in zip(corpus.paths(), corpus.images):
        (directory / relative).write_bytes(encode_ppm(image))
    return {
        "images": image_dir,
        "descriptors": corpus.descriptors.write(directory / "descriptors.c2fd"),
        "groundtruth": write_ground_truth(corpus.ground_truth, directory / "groundtruth.txt"),
    }
