# training/cross_validation.py

from dataclasses import dataclass, field
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

from config import TdnnConfig, TrainConfig, config_hash
from models.checkpoint import save_checkpoint
from .folds import FoldPlan, make_folds
from .metrics import summarize_maes
from .trainer import FoldMetrics, train_fold

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"


@dataclass
class CrossValidationSummary:
    folds: List[FoldMetrics]
    mean_mae: float
    std_mae: float
    plan: FoldPlan
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "folds": [m.to_dict() for m in self.folds],
            "fold_mae": [m.test_mae for m in self.folds],
            "mean_mae": self.mean_mae,
            "std_mae": self.std_mae,
            "baseline_mae": [m.baseline_mae for m in self.folds],
            "k": self.plan.k,
            **self.extra,
        }


def cross_validate(
    dataset,
    scores: Mapping[str, float],
    model_cfg: TdnnConfig,
    train_cfg: TrainConfig,
    store,
    output_dir: Optional[Path] = None,
    folds: Optional[Sequence[int]] = None,
    provenance: Optional[Dict[str, Any]] = None,
) -> CrossValidationSummary:
    """
    Song-grouped k-fold cross-validation.

    Folds are trained one after another on independent state. With an
    output directory, each fold's best checkpoint (``fold{i}.ckpt``) and log
    CSV are written there together with ``summary.json``.

    Args:
        folds: subset of fold indices to run; all k folds by default.
        provenance: extra keys (dataset fingerprint, ...) merged into the summary.
    """
    songs = sorted({s.song_id for s in dataset.segments if s.segment_id in scores})
    plan = make_folds(songs, train_cfg.k_folds, train_cfg.seed)
    logger.info("Fold plan over %d songs: sizes %s", len(songs), plan.sizes())

    results: List[FoldMetrics] = []
    for fold in folds if folds is not None else range(plan.k):
        checkpoint, metrics = train_fold(
            dataset, scores, plan, fold, model_cfg, train_cfg, store, log_dir=output_dir
        )
        if output_dir is not None:
            save_checkpoint(checkpoint, Path(output_dir) / f"fold{fold}.ckpt")
        results.append(metrics)

    mean_mae, std_mae = summarize_maes([m.test_mae for m in results])
    summary = CrossValidationSummary(
        folds=results,
        mean_mae=mean_mae,
        std_mae=std_mae,
        plan=plan,
        extra={
            "seed": train_cfg.seed,
            "config_hash": config_hash(train_cfg),
            "model_config_hash": config_hash(model_cfg),
            **(provenance or {}),
        },
    )
    logger.info("Cross-validation MAE %.4f +/- %.4f over %d folds", mean_mae, std_mae, len(results))

    if output_dir is not None:
        path = Path(output_dir) / SUMMARY_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(summary.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
    return summary
