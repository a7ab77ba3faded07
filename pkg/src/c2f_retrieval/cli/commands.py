"""Subcommand implementations; each returns the process exit code."""

import json
from argparse import Namespace
from pathlib import Path
from typing import List, Optional, TextIO

import pandas as pd

from c2f_retrieval.codebook import Codebook, DescriptorSet
from c2f_retrieval.config import EngineConfig, load_config
from c2f_retrieval.embedding import HeParameters
from c2f_retrieval.evaluation import (
    distractor_sweep,
    read_ground_truth,
    render_jsonl,
    render_table,
    run_evaluation,
    sweep,
    write_ground_truth,
)
from c2f_retrieval.holistic import HistogramStore, PpmDecodeError, load_image
from c2f_retrieval.index import memory_report, read_index, write_index
from c2f_retrieval.pipeline import (
    C2FPipeline,
    ParameterError,
    build_engine,
    encode_query,
    extract_histograms,
)
from c2f_retrieval.cli.manifest import STORE_FILES, CorpusManifest
from c2f_retrieval.synthgen import SynthSpec, generate, write_corpus
from c2f_retrieval.validation import StoreSchemaValidator

QUERY_STORES = ("histograms", "descriptors", "codebook", "he", "index")


def resolve_config(args: Namespace, base: Optional[EngineConfig] = None) -> EngineConfig:
    """Config file (or ``base``), then command-line overrides."""
    config = load_config(args.config) if getattr(args, "config", None) else (base or EngineConfig())
    return config.with_overrides(
        seed=getattr(args, "seed", None),
        codebook_size=getattr(args, "codebook_size", None),
        candidates=getattr(args, "k", None),
        ma=getattr(args, "ma", None),
        weights_enabled=False if getattr(args, "no_weights", False) else None,
        normalization_enabled=False if getattr(args, "no_norm", False) else None,
    )


def synth_spec(args: Namespace) -> SynthSpec:
    return SynthSpec(
        n_groups=args.groups,
        group_size=args.group_size,
        n_distractors=args.distractors,
        seed=args.seed if args.seed is not None else 0,
        separation=args.separation,
        noise=args.noise,
        image_size=args.image_size,
        descriptors_per_image=args.descriptors_per_image,
        dim=args.dim,
        palette_confusers=args.palette_confusers,
        word_confusers=args.word_confusers,
        protocol=args.protocol,
    )


def load_pipeline(manifest: CorpusManifest, config: EngineConfig, mode: str, logger) -> C2FPipeline:
    manifest.check_run_config(config)
    manifest.verify(QUERY_STORES)
    return C2FPipeline(
        histograms=HistogramStore.read(manifest.path("histograms"), config.hsv_dims),
        codebook=Codebook.read(manifest.path("codebook")),
        he=HeParameters.read(manifest.path("he")),
        index=read_index(manifest.path("index")),
        config=config.pipeline_config(mode=mode),
        descriptors=DescriptorSet.read(manifest.path("descriptors")),
        logger=logger,
    )


def _emit(out: TextIO, frame: pd.DataFrame, fmt: str) -> None:
    out.write(render_jsonl(frame) if fmt == "jsonl" else render_table(frame))


# ----------------------------------------------------------------------
# synth
# ----------------------------------------------------------------------
def cmd_synth(args: Namespace, out: TextIO, logger) -> int:
    corpus = generate(synth_spec(args), logger=logger)
    written = write_corpus(corpus, args.out)
    out.write(
        f"wrote {corpus.n_images} images, {len(corpus.descriptors)} descriptors, "
        f"{len(corpus.ground_truth)} queries to {Path(args.out).as_posix()}\n"
    )
    logger.info(f"Synthetic corpus files: {sorted(str(p) for p in written.values())}")
    return 0


# ----------------------------------------------------------------------
# extract
# ----------------------------------------------------------------------
def cmd_extract(args: Namespace, out: TextIO, logger) -> int:
    config = resolve_config(args)
    image_dir = Path(args.images)
    if not image_dir.is_dir():
        raise FileNotFoundError(f"image directory not found: {image_dir}")
    files = sorted(p for p in image_dir.iterdir() if p.is_file())
    if not files:
        raise FileNotFoundError(f"no image files in {image_dir}")

    images = []
    errors: List[str] = []
    for path in files:
        try:
            images.append(load_image(path))
        except (PpmDecodeError, OSError) as exc:
            errors.append(str(exc))
    if errors:
        for message in errors:
            logger.error(message)
        logger.error(f"{len(errors)} of {len(files)} image(s) could not be decoded")
        return 1

    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    manifest = CorpusManifest(root=root, config=config)

    histograms = extract_histograms(images, [p.name for p in files], config, logger=logger)
    manifest.record("histograms", histograms.write(root / STORE_FILES["histograms"]))

    if args.descriptors:
        descriptors = DescriptorSet.read(args.descriptors)
        StoreSchemaValidator(logger=logger).validate_dimensions(
            histograms=histograms, descriptors=descriptors
        )
        manifest.record("descriptors", descriptors.write(root / STORE_FILES["descriptors"]))

    if args.groundtruth:
        gt = read_ground_truth(args.groundtruth, protocol=args.protocol)
        gt.validate_ids(len(histograms))
        manifest.record("groundtruth", write_ground_truth(gt, root / STORE_FILES["groundtruth"]))

    manifest.write()
    out.write(f"extracted {len(histograms)} histograms (P={histograms.size})\n")
    out.write(f"fingerprint {manifest.fingerprint}\n")
    return 0


# ----------------------------------------------------------------------
# build
# ----------------------------------------------------------------------
def cmd_build(args: Namespace, out: TextIO, logger) -> int:
    root = Path(args.corpus)
    manifest = CorpusManifest.read(root)
    manifest.config = resolve_config(args, base=manifest.config)
    manifest.verify(("histograms", "descriptors"))

    histograms = HistogramStore.read(manifest.path("histograms"), manifest.config.hsv_dims)
    descriptors = DescriptorSet.read(manifest.path("descriptors"))
    engine = build_engine(descriptors, len(histograms), manifest.config, logger=logger)

    manifest.record("codebook", engine.codebook.write(root / STORE_FILES["codebook"]))
    manifest.record("he", engine.he.write(root / STORE_FILES["he"]))
    manifest.record("index", write_index(engine.index, root / STORE_FILES["index"]))
    manifest.built_under = manifest.fingerprint
    manifest.write()

    out.write(
        f"built k={engine.codebook.k} d_b={engine.he.d_b} "
        f"postings={engine.index.n_postings} images={engine.index.n_images}\n"
    )
    out.write(f"fingerprint {manifest.fingerprint}\n")
    return 0


# ----------------------------------------------------------------------
# query
# ----------------------------------------------------------------------
def cmd_query(args: Namespace, out: TextIO, logger) -> int:
    manifest = CorpusManifest.read(args.corpus)
    config = resolve_config(args, base=manifest.config)
    pipeline = load_pipeline(manifest, config, args.mode, logger)

    if args.id is not None:
        result = pipeline.run_query(query_id=args.id, full_depth=args.full_depth)
    else:
        histogram = pipeline.query_histogram(load_image(args.image))
        features = None
        if args.query_descriptors:
            raw = DescriptorSet.read(args.query_descriptors)
            features = encode_query(raw.values, pipeline.codebook, pipeline.he, ma=config.ma, logger=logger)
        elif args.mode != "holistic":
            raise ParameterError("querying by image file needs --query-descriptors unless --mode holistic")
        result = pipeline.run_query(histogram=histogram, features=features, full_depth=args.full_depth)

    if args.format == "jsonl":
        out.write(json.dumps(result.to_record(), sort_keys=True) + "\n")
        return 0
    out.write(
        f"query={result.query_id} candidates={result.candidates} "
        f"comparisons={result.comparison_count} holistic={result.holistic_comparisons} "
        f"local={result.local_comparisons}\n"
    )
    frame = pd.DataFrame(
        [
            {"rank": r, "image_id": e.image_id, "final": e.final, "local": e.local,
             "weight": e.weight, "holistic": e.holistic}
            for r, e in enumerate(result.entries, start=1)
        ]
    )
    out.write(render_table(frame))
    return 0


# ----------------------------------------------------------------------
# eval / sweep
# ----------------------------------------------------------------------
def cmd_eval(args: Namespace, out: TextIO, logger) -> int:
    manifest = CorpusManifest.read(args.corpus)
    config = resolve_config(args, base=manifest.config)
    manifest.verify(("groundtruth",))
    gt = read_ground_truth(manifest.path("groundtruth"), protocol=args.protocol)
    pipeline = load_pipeline(manifest, config, args.mode, logger)

    row = {
        "mode": args.mode,
        "K": config.candidates,
        "weights": "on" if config.weights_enabled else "off",
        "queries": len(gt),
    }
    row.update(run_evaluation(pipeline, gt, workers=args.workers, timing=args.timing))
    _emit(out, pd.DataFrame([row]), args.format)
    return 0


def cmd_sweep(args: Namespace, out: TextIO, logger) -> int:
    if args.distractor_multipliers:
        config = resolve_config(args)
        frame = distractor_sweep(
            synth_spec(args),
            args.distractor_multipliers,
            config,
            mode=args.mode,
            workers=args.workers,
            logger=logger,
        )
        _emit(out, frame, args.format)
        return 0

    if not args.corpus:
        raise ParameterError("sweep needs --corpus or --distractor-multipliers")
    manifest = CorpusManifest.read(args.corpus)
    config = resolve_config(args, base=manifest.config)
    manifest.verify(("groundtruth",))
    gt = read_ground_truth(manifest.path("groundtruth"), protocol=args.protocol)
    pipeline = load_pipeline(manifest, config, "c2f", logger)
    weights = {"both": (True, False), "on": (True,), "off": (False,)}[args.weights]
    frame = sweep(
        pipeline,
        gt,
        args.k_values,
        weights=weights,
        workers=args.workers,
        timing=args.timing,
        logger=logger,
    )
    _emit(out, frame, args.format)
    return 0


# ----------------------------------------------------------------------
# inspect
# ----------------------------------------------------------------------
def cmd_inspect(args: Namespace, out: TextIO, logger) -> int:
    manifest = CorpusManifest.read(args.corpus)
    config = manifest.config
    lines = [
        f"fingerprint: {manifest.fingerprint}",
        f"built_under: {manifest.built_under}",
        f"config_fingerprint: {config.fingerprint()}",
    ]
    if manifest.has("histograms"):
        histograms = HistogramStore.read(manifest.path("histograms"), config.hsv_dims)
        lines.append(f"histograms: images={len(histograms)} P={histograms.size} dims={histograms.dims}")
    if manifest.has("descriptors"):
        descriptors = DescriptorSet.read(manifest.path("descriptors"))
        lines.append(f"descriptors: count={len(descriptors)} D={descriptors.dim}")
    if manifest.has("groundtruth"):
        gt = read_ground_truth(manifest.path("groundtruth"), protocol=args.protocol)
        lines.append(f"groundtruth: queries={len(gt)} protocol={gt.protocol}")
    if manifest.has("codebook"):
        codebook = Codebook.read(manifest.path("codebook"))
        lines.append(f"codebook: k={codebook.k} D={codebook.dim} seed={codebook.seed}")
    if manifest.has("he"):
        he = HeParameters.read(manifest.path("he"))
        lines.append(f"he: d_b={he.d_b} D={he.dim} k={he.k}")
    if manifest.has("index"):
        index = read_index(manifest.path("index"))
        lines.append(
            f"index: k={index.config.k} d_b={index.config.d_b} h_t={index.config.h_t} "
            f"sigma={index.config.sigma:g} images={index.n_images} postings={index.n_postings} "
            f"flagged={len(index.flagged_images)}"
        )
        for key, value in memory_report(index).as_dict().items():
            lines.append(f"memory.{key}: {value}")
    for name in sorted(manifest.files):
        lines.append(f"file.{name}: {manifest.files[name]['path']} sha256={manifest.files[name]['sha256']}")
    out.write("\n".join(lines) + "\n")
    return 0
