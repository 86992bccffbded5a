import numpy as np
import pandas as pd
import pytest

from config import AugmentPolicy, BlockSpec, MelConfig, TdnnConfig, TrainConfig
from dataset import all_scores, score_targets
from exceptions import ConfigError, MissingFeatures, NonFiniteLoss
from features.feature_store import FeatureStore
from models.tdnn import init_parameters
from training import make_folds, mae, segments_by_song, split_fold, train_fold
from training.synthetic import build_corpus, corpus_store
from training.trainer import LOG_COLUMNS, fold_log_path, predict_segments

NO_AUGMENT = AugmentPolicy(enabled=False)


@pytest.fixture(scope="module")
def small_corpus():
    corpus = build_corpus(n_songs=20, seed=0)
    return corpus, corpus_store(corpus, MelConfig())


def train_config(**overrides):
    values = dict(
        learning_rate=1e-2,
        batch_size=16,
        max_epochs=3,
        patience=3,
        seed=0,
        k_folds=5,
        frozen_blocks=0,
        augment=NO_AUGMENT,
    )
    values.update(overrides)
    return TrainConfig(**values)


def run(corpus, store, model_cfg, cfg, fold=0, log_dir=None, scores=None):
    dataset = corpus.dataset
    scores = scores or score_targets(all_scores(dataset))
    plan = make_folds(dataset.song_ids(), cfg.k_folds, cfg.seed)
    return train_fold(dataset, scores, plan, fold, model_cfg, cfg, store, log_dir=log_dir)


def test_zero_learning_rate(small_corpus, tiny_model_cfg, tmp_path):
    corpus, store = small_corpus
    ckpt, metrics = run(corpus, store, tiny_model_cfg, train_config(learning_rate=0.0), log_dir=tmp_path)
    initial = init_parameters(tiny_model_cfg, seed=[0, 0])
    for name, tensor in initial.tensors.items():
        assert ckpt.params.tensors[name].tobytes() == tensor.tobytes()
    log = pd.read_csv(fold_log_path(tmp_path, 0))
    assert list(log.columns) == LOG_COLUMNS
    assert log["train_l1"].nunique() == 1
    assert metrics.epochs_run == 3
    assert metrics.best_epoch == 1


def test_split_counts_and_metadata(small_corpus, tiny_model_cfg):
    corpus, store = small_corpus
    ckpt, metrics = run(corpus, store, tiny_model_cfg, train_config(max_epochs=1, patience=1))
    assert metrics.n_test == 4 * 6
    assert metrics.n_val == 2 * 6
    assert metrics.n_train == 14 * 6
    assert metrics.baseline_mae == pytest.approx(0.4)
    assert ckpt.metadata["fold"] == 0
    assert ckpt.metadata["train_config"]["learning_rate"] == 1e-2


def test_two_runs_have_identical_loss_logs(small_corpus, tiny_model_cfg, tmp_path):
    corpus, store = small_corpus
    run(corpus, store, tiny_model_cfg, train_config(), log_dir=tmp_path / "a")
    run(corpus, store, tiny_model_cfg, train_config(), log_dir=tmp_path / "b")
    a = pd.read_csv(fold_log_path(tmp_path / "a", 0))
    b = pd.read_csv(fold_log_path(tmp_path / "b", 0))
    pd.testing.assert_frame_equal(a[["epoch", "train_l1", "val_l1"]], b[["epoch", "train_l1", "val_l1"]])


def test_returned_checkpoint_is_the_best_validation_epoch(small_corpus, tiny_model_cfg, tmp_path):
    corpus, store = small_corpus
    cfg = train_config(max_epochs=6, patience=6)
    ckpt, metrics = run(corpus, store, tiny_model_cfg, cfg, log_dir=tmp_path)
    log = pd.read_csv(fold_log_path(tmp_path, 0))
    assert metrics.best_val_l1 == pytest.approx(log["val_l1"].min(), abs=1e-9)

    from models.tdnn import TdnnModel

    dataset = corpus.dataset
    scores = score_targets(all_scores(dataset))
    plan = make_folds(dataset.song_ids(), 5, 0)
    split = split_fold(plan, segments_by_song({s.segment_id: s.song_id for s in dataset.segments}), 0)
    model = TdnnModel(tiny_model_cfg, params=ckpt.params)
    val_l1 = mae(predict_segments(model, store, split.val), [scores[s] for s in split.val])
    assert val_l1 == pytest.approx(metrics.best_val_l1, abs=1e-12)


def test_learns_the_synthetic_cue(small_corpus, tiny_model_cfg):
    corpus, store = small_corpus
    _, metrics = run(corpus, store, tiny_model_cfg, train_config(max_epochs=20, patience=20))
    assert metrics.test_mae < metrics.baseline_mae


def test_missing_features(small_corpus, tiny_model_cfg):
    corpus, _ = small_corpus
    empty = FeatureStore(corpus.dataset.segments, MelConfig())
    with pytest.raises(MissingFeatures):
        run(corpus, empty, tiny_model_cfg, train_config())


def test_non_finite_loss(small_corpus, tiny_model_cfg):
    corpus, store = small_corpus
    scores = {s.segment_id: float("nan") for s in corpus.dataset.segments}
    with pytest.raises(NonFiniteLoss):
        run(corpus, store, tiny_model_cfg, train_config(), scores=scores)


def test_model_freeze_applies_when_train_leaves_it_unset(small_corpus, tiny_model_cfg):
    corpus, store = small_corpus
    model_cfg = tiny_model_cfg.model_copy(update={"frozen_blocks": 1})
    ckpt, _ = run(corpus, store, model_cfg, train_config(frozen_blocks=None))
    initial = init_parameters(model_cfg, seed=[0, 0])
    assert ckpt.params.frozen == frozenset({"block1.weight", "block1.bias"})
    assert ckpt.config.frozen_blocks == 1
    for name in ("block1.weight", "block1.bias"):
        assert ckpt.params.tensors[name].tobytes() == initial.tensors[name].tobytes()


def test_conflicting_freeze_settings_are_rejected(small_corpus, tiny_model_cfg):
    corpus, store = small_corpus
    with pytest.raises(ConfigError, match="frozen_blocks"):
        run(corpus, store, tiny_model_cfg, train_config(frozen_blocks=2))


@pytest.mark.slow
def test_overfits_a_small_fixture():
    model_cfg = TdnnConfig(
        blocks=[
            BlockSpec(in_channels=24, out_channels=32, kernel=3, dilation=1),
            BlockSpec(in_channels=32, out_channels=32, kernel=3, dilation=2),
        ],
        embed_dim=16,
        frozen_blocks=0,
        experimental=True,
    )
    corpus = build_corpus(n_songs=4, seed=1)
    store = FeatureStore(corpus.dataset.segments, MelConfig())
    rng = np.random.default_rng(0)
    scores = {}
    for segment in corpus.dataset.segments:
        store.put(segment.segment_id, rng.standard_normal((100, 24)))
        scores[segment.segment_id] = float(rng.uniform(0.1, 0.9))
    cfg = train_config(
        learning_rate=1e-3, batch_size=32, max_epochs=500, patience=500, k_folds=4, validation_fraction=0.0
    )
    _, metrics = run(corpus, store, model_cfg, cfg, scores=scores)
    assert metrics.n_train == 18
    assert metrics.best_val_l1 < 0.02
