"""Pool-based active learning with acquisition-bias diagnostics."""

from ._albias import (
    ComputeError,
    Corpus,
    DataError,
    Error,
    FastText,
    NaiveBayes,
    RunLog,
    UsageError,
    calibration,
    chance_overlap,
    class_bias,
    fnv1a64,
    label_entropy,
    overlap_pct,
    run,
    score_entropy,
    score_lc,
    select_topk,
    svm_support_ids,
    tokenize,
)

__all__ = [
    "ComputeError",
    "Corpus",
    "DataError",
    "Error",
    "FastText",
    "NaiveBayes",
    "RunLog",
    "UsageError",
    "calibration",
    "chance_overlap",
    "class_bias",
    "fnv1a64",
    "label_entropy",
    "overlap_pct",
    "run",
    "score_entropy",
    "score_lc",
    "select_topk",
    "svm_support_ids",
    "tokenize",
]
