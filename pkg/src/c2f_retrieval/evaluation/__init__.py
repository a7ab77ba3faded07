from c2f_retrieval.evaluation.ground_truth import (
    PROTOCOLS,
    EvaluationError,
    GroundTruth,
    read_ground_truth,
    resolve_protocol,
    write_ground_truth,
)
from c2f_retrieval.evaluation.metrics import (
    average_precision,
    evaluate,
    mean_ap,
    ns_score,
    per_query_ap,
)
from c2f_retrieval.evaluation.sweep import (
    distractor_sweep,
    render_jsonl,
    render_table,
    run_evaluation,
    sweep,
)

__all__ = [
    "PROTOCOLS",
    "EvaluationError",
    "GroundTruth",
    "read_ground_truth",
    "resolve_protocol",
    "write_ground_truth",
    "average_precision",
    "evaluate",
    "mean_ap",
    "ns_score",
    "per_query_ap",
    "distractor_sweep",
    "render_jsonl",
    "render_table",
    "run_evaluation",
    "sweep",
]
