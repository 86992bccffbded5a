# training/trainer.py

from dataclasses import asdict, dataclass
import logging
from pathlib import Path
import time
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import TdnnConfig, TrainConfig, effective_frozen_blocks, frozen_blocks_conflict
from exceptions import ConfigError, NonFiniteLoss, TrainingError
from features.feature_store import FeatureStore
from models.checkpoint import Checkpoint, load_checkpoint
from models.tdnn import TdnnModel, apply_freeze, init_parameters, load_compatible
from .folds import FoldPlan, FoldSplit, segments_by_song, split_fold
from .metrics import constant_baseline_mae, mae
from .optimizer import Adam

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["epoch", "train_l1", "val_l1", "lr", "wall_seconds"]


@dataclass(frozen=True)
class FoldMetrics:
    fold: int
    test_mae: float
    baseline_mae: float
    n_train: int
    n_val: int
    n_test: int
    epochs_run: int
    best_epoch: int
    best_val_l1: float

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_l1: float
    val_l1: Optional[float]
    lr: float
    wall_seconds: float


def fold_log_path(log_dir: Path, fold: int) -> Path:
    return Path(log_dir) / f"fold{fold}_log.csv"


def write_training_log(records: Sequence[EpochRecord], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([asdict(r) for r in records], columns=LOG_COLUMNS)
    frame.to_csv(path, index=False, float_format="%.10g")


def predict_segments(model: TdnnModel, store: FeatureStore, segment_ids: Sequence[str]) -> np.ndarray:
    """Scores clean features of each segment, in the given order."""
    return np.array([model.predict(store.features(s)) for s in segment_ids], dtype=np.float64)


def _with_targets(segment_ids: Sequence[str], scores: Mapping[str, float]) -> List[str]:
    return [s for s in segment_ids if s in scores]


def _initial_model(model_cfg: TdnnConfig, train_cfg: TrainConfig, fold: int) -> TdnnModel:
    params = init_parameters(model_cfg, seed=[train_cfg.seed, fold])
    if train_cfg.init_checkpoint:
        source = load_checkpoint(train_cfg.init_checkpoint)
        load_compatible(params, source.params)
    params = apply_freeze(params, effective_frozen_blocks(model_cfg, train_cfg))
    return TdnnModel(model_cfg, params=params)


def _run_epoch(
    model: TdnnModel,
    optimizer: Adam,
    store: FeatureStore,
    train_ids: Sequence[str],
    targets: np.ndarray,
    train_cfg: TrainConfig,
    fold: int,
    epoch: int,
) -> float:
    """
    One pass over the training segments in a seeded permutation.

    Inside a batch, samples are processed and their gradients summed in
    ascending sample index so the update never depends on evaluation order.
    Returns the mean per-sample L1 over the epoch, accumulated in index order.
    """
    n = len(train_ids)
    losses = np.zeros(n, dtype=np.float64)
    order = np.random.default_rng([train_cfg.seed, fold, epoch]).permutation(n)
    augment = train_cfg.augment.enabled

    for start in range(0, n, train_cfg.batch_size):
        batch = np.sort(order[start : start + train_cfg.batch_size])
        grads: Dict[str, np.ndarray] = {}
        for i in batch:
            segment_id = train_ids[int(i)]
            mel = (
                store.augmented(segment_id, train_cfg.augment, epoch)
                if augment
                else store.features(segment_id)
            )
            out = model.forward(mel, train=True)
            diff = out.score - float(targets[i])
            loss = abs(diff)
            if not np.isfinite(loss):
                raise NonFiniteLoss(
                    f"Non-finite loss on segment {segment_id!r} (fold {fold}, epoch {epoch})"
                )
            losses[i] = loss
            sample_grads = model.backward(out, float(np.sign(diff)) / len(batch))
            for name, g in sample_grads.items():
                if name in grads:
                    grads[name] += g
                else:
                    grads[name] = g.astype(np.float64)
        optimizer.step(model.params, grads)

    return float(losses.mean())


def _l1(model: TdnnModel, store: FeatureStore, ids: Sequence[str], targets: np.ndarray) -> float:
    value = mae(predict_segments(model, store, ids), targets)
    if not np.isfinite(value):
        raise NonFiniteLoss(f"Non-finite evaluation loss over {len(ids)} segments")
    return value


def train_fold(
    dataset,
    scores: Mapping[str, float],
    plan: FoldPlan,
    fold: int,
    model_cfg: TdnnConfig,
    train_cfg: TrainConfig,
    store: FeatureStore,
    log_dir: Optional[Path] = None,
) -> Tuple[Checkpoint, FoldMetrics]:
    """
    Trains one cross-validation fold with L1 loss and early stopping.

    Args:
        dataset: SurveyDataset supplying segment -> song membership.
        scores: segment_id -> unit score targets; segments without a target are ignored.
        plan: the song-level fold assignment.
        fold: which fold is held out for testing.
        model_cfg: network layout.
        train_cfg: optimizer, schedule, freezing and augmentation settings.
        store: feature source for every segment.
        log_dir: when given, the per-epoch CSV log is written there.

    Returns:
        (Checkpoint, FoldMetrics): parameters of the best monitored epoch and
        the test metrics of exactly those parameters.
    """
    if frozen_blocks_conflict(model_cfg, train_cfg):
        raise ConfigError(
            f"train.frozen_blocks={train_cfg.frozen_blocks} disagrees with model.frozen_blocks={model_cfg.frozen_blocks}"
        )
    song_segments = segments_by_song({s.segment_id: s.song_id for s in dataset.segments})
    split: FoldSplit = split_fold(plan, song_segments, fold, train_cfg.validation_fraction)
    train_ids = _with_targets(split.train, scores)
    val_ids = _with_targets(split.val, scores)
    test_ids = _with_targets(split.test, scores)
    if not train_ids or not test_ids:
        raise TrainingError(
            f"Fold {fold} has {len(train_ids)} training and {len(test_ids)} test segments with targets"
        )

    # Fail before the first epoch if any input is missing.
    for segment_id in (*train_ids, *val_ids, *test_ids):
        store.features(segment_id)

    train_y = np.array([scores[s] for s in train_ids], dtype=np.float64)
    val_y = np.array([scores[s] for s in val_ids], dtype=np.float64)
    test_y = np.array([scores[s] for s in test_ids], dtype=np.float64)

    model = _initial_model(model_cfg, train_cfg, fold)
    optimizer = Adam(train_cfg.learning_rate, train_cfg.beta1, train_cfg.beta2, train_cfg.eps)
    if not val_ids:
        logger.warning("Fold %d has no validation songs; early stopping monitors train L1", fold)

    records: List[EpochRecord] = []
    best_params = model.params.copy()
    best_metric = np.inf
    best_epoch = 0
    stale = 0
    for epoch in range(1, train_cfg.max_epochs + 1):
        started = time.perf_counter()
        train_l1 = _run_epoch(model, optimizer, store, train_ids, train_y, train_cfg, fold, epoch)
        val_l1 = _l1(model, store, val_ids, val_y) if val_ids else None
        records.append(
            EpochRecord(epoch, train_l1, val_l1, train_cfg.learning_rate, time.perf_counter() - started)
        )
        logger.info(
            "fold %d epoch %d: train L1 %.5f, val L1 %s",
            fold,
            epoch,
            train_l1,
            "n/a" if val_l1 is None else f"{val_l1:.5f}",
        )

        monitored = val_l1 if val_l1 is not None else train_l1
        if monitored < best_metric:
            best_metric, best_epoch, stale = monitored, epoch, 0
            best_params = model.params.copy()
        else:
            stale += 1
            if stale >= train_cfg.patience:
                logger.warning(
                    "Fold %d stopped early at epoch %d (best epoch %d)", fold, epoch, best_epoch
                )
                break

    model.params = best_params
    test_mae = _l1(model, store, test_ids, test_y)
    metrics = FoldMetrics(
        fold=fold,
        test_mae=test_mae,
        baseline_mae=constant_baseline_mae(test_y),
        n_train=len(train_ids),
        n_val=len(val_ids),
        n_test=len(test_ids),
        epochs_run=len(records),
        best_epoch=best_epoch,
        best_val_l1=float(best_metric),
    )
    logger.info(
        "Fold %d: test MAE %.4f (constant-0.5 baseline %.4f)", fold, test_mae, metrics.baseline_mae
    )

    if log_dir is not None:
        write_training_log(records, fold_log_path(log_dir, fold))

    checkpoint = Checkpoint(
        config=model_cfg,
        params=best_params,
        metadata={
            **metrics.to_dict(),
            "seed": train_cfg.seed,
            "train_config": train_cfg.model_dump(mode="json"),
        },
    )
    return checkpoint, metrics
