"""Ablation sweeps over candidate count, adaptive weights and distractor count."""

import time
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from c2f_retrieval.config import EngineConfig
from c2f_retrieval.evaluation.ground_truth import GroundTruth
from c2f_retrieval.evaluation.metrics import evaluate
from c2f_retrieval.index import candidate_memory
from c2f_retrieval.logging import get_logger
from c2f_retrieval.pipeline import C2FPipeline, RankList

METRIC_COLUMNS = ("mAP", "N-S")


def run_evaluation(
    pipeline: C2FPipeline,
    gt: GroundTruth,
    workers: int = 1,
    timing: bool = False,
) -> Dict[str, float]:
    """
    Query every ground-truth query at full depth and score the rankings.

    Returns the metrics plus mean comparison counters; with ``timing``
    also the mean latency in milliseconds and mean candidate memory.
    """
    gt.validate_ids(pipeline.n_images)
    start = time.perf_counter()
    results: List[RankList] = pipeline.run_batch(gt.queries, full_depth=True, workers=workers)
    elapsed = time.perf_counter() - start

    row: Dict[str, float] = dict(evaluate({r.query_id: r.image_ids() for r in results}, gt))
    row["comparisons"] = float(np.mean([r.comparison_count for r in results]))
    row["local_comparisons"] = float(np.mean([r.local_comparisons for r in results]))
    if timing:
        row["latency_ms"] = 1000.0 * elapsed / max(len(results), 1)
        row["candidate_bytes"] = float(
            np.mean(
                [
                    candidate_memory(pipeline.index, r.image_ids()[: r.candidates])
                    for r in results
                ]
            )
        )
    return row


def sweep(
    pipeline: C2FPipeline,
    gt: GroundTruth,
    k_values: Sequence[int],
    weights: Sequence[bool] = (True, False),
    workers: int = 1,
    timing: bool = False,
    logger=None,
) -> pd.DataFrame:
    """
    One metric row per (K, weights on/off) pair.

    Parameters
    ----------
    pipeline : C2FPipeline
        Built pipeline; its stores are shared by every row.
    gt : GroundTruth
    k_values : sequence of int
        Candidate counts to evaluate. Repeated values are evaluated once.
    weights : sequence of bool, default=(True, False)
        Adaptive weight settings to evaluate at each K.
    workers : int, default=1
        Query threads per row.
    timing : bool, default=False
        Add latency and candidate memory columns. Off by default so that
        reports of identical runs are identical.
    logger :
        Optional Loguru logger instance.

    Returns
    -------
    DataFrame
        Columns ``K``, ``weights``, the metrics, comparison counters and,
        when both weight settings are present, ``delta`` (weights on
        minus weights off for the primary metric, on the weights-on row).
    """
    logger = logger or get_logger("sweep")
    requested = [int(k) for k in k_values]
    k_values = list(dict.fromkeys(requested))
    if len(k_values) < len(requested):
        logger.warning(f"Repeated K values dropped; sweeping K={k_values}")
    weights = list(dict.fromkeys(bool(w) for w in weights))
    rows = []
    for k in k_values:
        for enabled in weights:
            logger.info(f"Sweep row: K={k}, weights={'on' if enabled else 'off'}")
            configured = pipeline.with_config(K=k, weights_enabled=enabled, mode="c2f")
            row = {"K": k, "weights": "on" if enabled else "off"}
            row.update(run_evaluation(configured, gt, workers=workers, timing=timing))
            rows.append(row)
    frame = pd.DataFrame(rows)
    return _with_weight_deltas(frame, _primary_metric(gt))


def _primary_metric(gt: GroundTruth) -> str:
    return "N-S" if gt.protocol == "ukbench" else "mAP"


def _with_weight_deltas(frame: pd.DataFrame, metric: str) -> pd.DataFrame:
    if frame.empty or set(frame["weights"]) != {"on", "off"}:
        return frame
    off = frame[frame["weights"] == "off"].set_index("K")[metric]
    frame["delta"] = [
        row[metric] - off[row["K"]] if row["weights"] == "on" else np.nan
        for _, row in frame.iterrows()
    ]
    return frame


def distractor_sweep(
    spec,
    multipliers: Sequence[int],
    config: EngineConfig,
    K: Optional[int] = None,
    mode: str = "c2f",
    workers: int = 1,
    logger=None,
) -> pd.DataFrame:
    """
    Rebuild a synthetic corpus with growing distractor sets and evaluate each.

    ``multipliers`` scale the number of planted images; 0 means no
    distractors. Every other corpus parameter, including the seed, stays
    fixed.
    """
    from c2f_retrieval.pipeline import build_pipeline
    from c2f_retrieval.synthgen import generate

    logger = logger or get_logger("distractor-sweep")
    planted = spec.n_groups * spec.group_size
    rows = []
    for multiplier in multipliers:
        corpus = generate(spec.with_distractors(int(multiplier) * planted))
        logger.info(f"Distractor row: x{multiplier} ({corpus.n_images} images)")
        run_config = config if K is None else config.with_overrides(candidates=K)
        pipeline = build_pipeline(
            corpus.images, corpus.descriptors, run_config, mode=mode, logger=logger
        )
        row = {
            "distractors": int(multiplier) * planted,
            "multiplier": int(multiplier),
            "n_images": corpus.n_images,
        }
        row.update(run_evaluation(pipeline, corpus.ground_truth, workers=workers))
        rows.append(row)
    return pd.DataFrame(rows)


def render_table(frame: pd.DataFrame) -> str:
    """Aligned-column text rendering of a report."""
    if frame.empty:
        return "(empty report)\n"
    return frame.to_string(index=False, float_format=lambda v: f"{v:.6f}") + "\n"


def render_jsonl(frame: pd.DataFrame) -> str:
    """One JSON object per row."""
    if frame.empty:
        return ""
    return frame.to_json(orient="records", lines=True).rstrip("\n") + "\n"
