"""``c2f`` command-line entry point."""

import argparse
import sys
from typing import Optional, Sequence

from c2f_retrieval.cli import commands
from c2f_retrieval.logging import configure_logging, get_logger
from c2f_retrieval.pipeline import MODES

PROTOCOL_CHOICES = ("holidays-like", "ukbench-like")


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="JSON engine configuration file")
    parser.add_argument("--seed", type=int, default=None, help="Seed for k-means, HE and synthetic data")


def _add_query_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", required=True, help="Corpus directory holding manifest.json")
    parser.add_argument("--k", type=int, default=None, help="Candidate count K kept by the holistic filter")
    parser.add_argument("--no-weights", action="store_true", help="Use uniform 1/K weights")
    parser.add_argument("--no-norm", action="store_true", help="Do not divide local scores by the image norm")
    parser.add_argument("--ma", type=int, default=None, help="Query-side multiple assignment")
    parser.add_argument("--mode", choices=MODES, default="c2f", help="Retrieval mode")
    parser.add_argument("--format", choices=("text", "jsonl"), default="text")


def _add_synth_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--groups", type=int, default=4)
    parser.add_argument("--group-size", type=int, default=4)
    parser.add_argument("--distractors", type=int, default=0)
    parser.add_argument("--separation", type=float, default=1.0)
    parser.add_argument("--noise", type=float, default=0.0)
    parser.add_argument("--image-size", type=int, default=16)
    parser.add_argument("--descriptors-per-image", type=int, default=24)
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--palette-confusers", type=int, default=0)
    parser.add_argument("--word-confusers", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="c2f",
        description="Coarse-to-fine image retrieval: holistic filtering, adaptive weights, local refinement.",
    )
    parser.add_argument("--log-level", default=None, help="Minimum level written to stderr (default: $C2F_LOG_LEVEL or INFO)")
    parser.add_argument("--log-json", action="store_true", help="Write log records to stderr as JSON lines")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="Write a seeded synthetic corpus")
    synth.add_argument("out", help="Output directory")
    _add_config_arguments(synth)
    _add_synth_arguments(synth)
    synth.add_argument("--protocol", choices=PROTOCOL_CHOICES, default="holidays-like")
    synth.set_defaults(handler=commands.cmd_synth)

    extract = sub.add_parser("extract", help="Extract histograms and ingest descriptors")
    extract.add_argument("--images", required=True, help="Directory of PPM (or Pillow-readable) images")
    extract.add_argument("--descriptors", default=None, help="C2FD descriptor file to ingest")
    extract.add_argument("--groundtruth", default=None, help="Ground-truth text file to ingest")
    extract.add_argument("--out", required=True, help="Corpus directory to create")
    extract.add_argument("--protocol", choices=PROTOCOL_CHOICES, default="holidays-like")
    extract.add_argument("--codebook-size", type=int, default=None)
    _add_config_arguments(extract)
    extract.set_defaults(handler=commands.cmd_extract)

    build = sub.add_parser("build", help="Train codebook and HE parameters, build the index")
    build.add_argument("--corpus", required=True)
    build.add_argument("--codebook-size", type=int, default=None)
    _add_config_arguments(build)
    build.set_defaults(handler=commands.cmd_build)

    query = sub.add_parser("query", help="Rank the corpus for one query")
    _add_query_arguments(query)
    _add_config_arguments(query)
    target = query.add_mutually_exclusive_group(required=True)
    target.add_argument("--id", type=int, default=None, help="Database image used as query")
    target.add_argument("--image", default=None, help="Query image file")
    query.add_argument("--query-descriptors", default=None, help="C2FD file with the query's descriptors")
    query.add_argument("--full-depth", action="store_true", help="Append non-candidates in holistic order")
    query.set_defaults(handler=commands.cmd_query)

    evaluate = sub.add_parser("eval", help="mAP / N-S over the corpus ground truth")
    _add_query_arguments(evaluate)
    _add_config_arguments(evaluate)
    evaluate.add_argument("--protocol", choices=PROTOCOL_CHOICES, default="holidays-like")
    evaluate.add_argument("--workers", type=int, default=1)
    evaluate.add_argument("--timing", action="store_true", help="Add latency and candidate memory columns")
    evaluate.set_defaults(handler=commands.cmd_eval)

    sweep = sub.add_parser("sweep", help="Candidate-count / weights / distractor sweeps")
    sweep.add_argument("--corpus", default=None)
    sweep.add_argument("--k-values", type=int, nargs="+", default=[1, 2, 4, 8])
    sweep.add_argument("--weights", choices=("both", "on", "off"), default="both")
    sweep.add_argument("--distractor-multipliers", type=int, nargs="+", default=None,
                       help="Synthetic distractor sweep: multiples of the planted image count")
    sweep.add_argument("--k", type=int, default=None)
    sweep.add_argument("--no-norm", action="store_true")
    sweep.add_argument("--ma", type=int, default=None)
    sweep.add_argument("--codebook-size", type=int, default=None)
    sweep.add_argument("--mode", choices=MODES, default="c2f")
    sweep.add_argument("--protocol", choices=PROTOCOL_CHOICES, default="holidays-like")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--timing", action="store_true")
    sweep.add_argument("--format", choices=("text", "jsonl"), default="text")
    _add_config_arguments(sweep)
    _add_synth_arguments(sweep)
    sweep.set_defaults(handler=commands.cmd_sweep)

    inspect = sub.add_parser("inspect", help="Print store headers, memory report and fingerprint")
    inspect.add_argument("--corpus", required=True)
    inspect.add_argument("--protocol", choices=PROTOCOL_CHOICES, default="holidays-like")
    inspect.set_defaults(handler=commands.cmd_inspect)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, serialize=args.log_json)
    logger = get_logger("c2f")
    try:
        return args.handler(args, sys.stdout, logger)
    except (ValueError, OSError) as exc:
        logger.error(f"{args.command} failed: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
