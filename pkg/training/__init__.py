from .cross_validation import CrossValidationSummary, cross_validate
from .folds import FoldPlan, FoldSplit, make_folds, segments_by_song, split_fold
from .metrics import constant_baseline_mae, mae, summarize_maes
from .trainer import FoldMetrics, train_fold

__all__ = [
    "CrossValidationSummary",
    "FoldMetrics",
    "FoldPlan",
    "FoldSplit",
    "constant_baseline_mae",
    "cross_validate",
    "mae",
    "make_folds",
    "segments_by_song",
    "split_fold",
    "summarize_maes",
    "train_fold",
]
