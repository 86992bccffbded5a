# cli/commands.py
"""Subcommand implementations. Each takes the parsed arguments and the resolved RunConfig and returns an exit code."""

import logging
from pathlib import Path
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from analytics import build_report, render_report, report_from_json
from config import TOOL_VERSION, RunConfig, config_hash, write_run_stamp
from dataset import (
    SurveyDataset,
    all_scores,
    dataset_fingerprint,
    dataset_summary,
    export_dataset,
    filter_valid,
    ingest,
    load_column_map,
    score_targets,
)
from exceptions import EmptySubgroup, InvalidInputError
from features.feature_store import FeatureStore
from models.checkpoint import load_checkpoint
from models.predictor import HOP_SECONDS, WINDOW_SECONDS, predict_file
from models.tdnn import TdnnModel
from training import cross_validate
from training.synthetic import build_corpus, write_corpus

logger = logging.getLogger(__name__)

REPORT_EXTENSIONS = {"markdown": "md", "md": "md", "json": "json", "csv": "csv"}


def _dataset_source(config: RunConfig):
    paths = config.dataset
    files = {"segments": paths.segments, "participants": paths.participants, "responses": paths.responses}
    if all(files.values()):
        return files
    if paths.directory:
        return paths.directory
    raise InvalidInputError(
        "No dataset given: pass --dataset DIR or set dataset paths in the config"
    )


def load_raw_dataset(config: RunConfig) -> SurveyDataset:
    return ingest(_dataset_source(config), load_column_map(config.dataset.column_map))


def load_dataset(config: RunConfig) -> SurveyDataset:
    """The survey after the validity filter."""
    return filter_valid(load_raw_dataset(config))


def parse_dims(tokens: Optional[Sequence[str]]) -> Optional[List[Tuple[str, str]]]:
    """``gender sex`` or ``gender:sex age_group:age_group`` -> [(participant dim, singer dim), ...]."""
    if not tokens:
        return None
    if all(":" in t for t in tokens):
        return [tuple(t.split(":", 1)) for t in tokens]
    if any(":" in t for t in tokens) or len(tokens) % 2:
        raise InvalidInputError(f"--dims expects participant/singer pairs, got {list(tokens)}")
    return [(tokens[i], tokens[i + 1]) for i in range(0, len(tokens), 2)]


def feature_store(config: RunConfig, dataset: SurveyDataset) -> FeatureStore:
    audio_root = config.dataset.audio_root or config.dataset.directory
    return FeatureStore(dataset.segments, config.mel, audio_root=audio_root, cache_dir=config.feature_cache)


def cmd_ingest(args, config: RunConfig) -> int:
    raw = load_raw_dataset(config)
    filtered = filter_valid(raw)
    before, after = dataset_summary(raw), dataset_summary(filtered)

    out = Path(config.output_dir)
    export_dataset(raw if args.keep_invalid else filtered, out)
    write_run_stamp(config, out)

    print(
        pd.DataFrame({"before_filter": before, "after_filter": after}).to_string()
    )
    print(f"participants: {after['participants']}, responses: {after['responses']}")
    logger.info("Canonical dataset written to %s", out)
    return 0


def cmd_analyze(args, config: RunConfig) -> int:
    dataset = load_dataset(config)
    dims = parse_dims(args.dims)
    report = build_report(
        dataset,
        config.analytics,
        dims,
        provenance={"dataset_sha256": dataset_fingerprint(dataset), "tool_version": TOOL_VERSION},
    )
    if dims:
        for table in report.ac_tables:
            if not table.cells:
                raise EmptySubgroup(f"{table.participant_dim} x {table.singer_dim}")

    out = Path(config.output_dir)
    write_run_stamp(config, out)
    formats = ("markdown", "json", "csv") if args.format == "all" else (args.format,)
    for fmt in formats:
        target = out / f"report.{REPORT_EXTENSIONS[fmt]}"
        target.write_bytes(render_report(report, fmt))
        logger.info("Wrote %s", target)
    if "markdown" in formats or "md" in formats:
        sys.stdout.write(render_report(report, "markdown").decode("utf-8"))
    return 0


def cmd_featurize(args, config: RunConfig) -> int:
    if not config.feature_cache:
        raise InvalidInputError("featurize needs a cache directory (--cache or feature_cache)")
    dataset = load_dataset(config)
    store = feature_store(config, dataset)
    count = store.populate(s.segment_id for s in dataset.segments)
    write_run_stamp(config, Path(config.feature_cache))
    print(f"featurized: {count}")
    return 0


def cmd_train(args, config: RunConfig) -> int:
    dataset = load_dataset(config)
    scores = score_targets(all_scores(dataset))
    out = Path(config.output_dir)
    write_run_stamp(config, out)
    summary = cross_validate(
        dataset,
        scores,
        config.model,
        config.train,
        feature_store(config, dataset),
        output_dir=out,
        folds=args.folds,
        provenance={
            "config_hash": config_hash(config),
            "dataset_sha256": dataset_fingerprint(dataset),
            "tool_version": TOOL_VERSION,
        },
    )
    for metrics in summary.folds:
        print(
            f"fold {metrics.fold}: MAE {metrics.test_mae:.4f} "
            f"(baseline {metrics.baseline_mae:.4f}, {metrics.n_train}/{metrics.n_val}/{metrics.n_test} segments)"
        )
    print(f"MAE {summary.mean_mae:.4f} +/- {summary.std_mae:.4f}")
    return 0


def _audio_inputs(location: str) -> List[Path]:
    path = Path(location)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".wav")
        if not files:
            raise InvalidInputError(f"No .wav files in {path}")
        return files
    if not path.is_file():
        raise InvalidInputError(f"Input not found: {path}")
    return [path]


def cmd_predict(args, config: RunConfig) -> int:
    checkpoint = load_checkpoint(args.checkpoint)
    model = TdnnModel(checkpoint.config, params=checkpoint.params)
    target = Path(args.out) if args.out else Path(config.output_dir) / "predictions.csv"

    file_rows, window_rows = [], []
    for path in _audio_inputs(args.inputs):
        prediction = predict_file(model, path, config.mel, with_embedding=args.embedding)
        row = {
            "path": str(path),
            "score": prediction.mean_score,
            "n_windows": len(prediction.windows),
            "padded": int(prediction.padded),
        }
        if args.embedding:
            mean_embedding = np.mean([w.embedding for w in prediction.windows], axis=0)
            row.update({f"emb_{i}": float(v) for i, v in enumerate(mean_embedding)})
        file_rows.append(row)
        for window in prediction.windows:
            window_rows.append(
                {
                    "path": str(path),
                    "window_start": window.start,
                    "window_seconds": WINDOW_SECONDS,
                    "hop_seconds": HOP_SECONDS,
                    "score": window.score,
                }
            )

    target.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(file_rows).to_csv(target, index=False, lineterminator="\n")
    windows_path = target.with_name(target.stem + "_windows.csv")
    pd.DataFrame(window_rows).to_csv(windows_path, index=False, lineterminator="\n")
    write_run_stamp(config, target.parent)
    logger.info("Scored %d files (%d windows) into %s", len(file_rows), len(window_rows), target)
    return 0


def cmd_report(args, config: RunConfig) -> int:
    source = Path(args.inputs)
    if not source.is_file():
        raise InvalidInputError(f"Report not found: {source}")
    rendered = render_report(report_from_json(source.read_bytes()), args.format)
    if args.out:
        Path(args.out).write_bytes(rendered)
    else:
        sys.stdout.write(rendered.decode("utf-8"))
    return 0


def cmd_synth(args, config: RunConfig) -> int:
    seed = config.seed if args.seed is None else args.seed
    corpus = build_corpus(n_songs=args.songs, seed=seed, sample_rate=config.mel.sample_rate)
    out = write_corpus(corpus, args.out)
    write_run_stamp(config, out)
    print(f"songs: {len(corpus.songs)}, segments: {len(corpus.dataset.segments)}")
    return 0
