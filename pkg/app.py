import argparse
import logging
import os
import sys

from dotenv import load_dotenv

from config import TOOL_VERSION, load_run_config, parse_override
from exceptions import AppException

load_dotenv()  # Load PSVF_CONFIG / PSVF_OUTPUT_DIR from a .env file

THREAD_ENV_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psvf", description="Singing-voice femininity survey analytics and regression toolkit"
    )
    parser.add_argument("--version", action="version", version=f"psvf {TOOL_VERSION}")
    parser.add_argument("--config", help="YAML run config (default: $PSVF_CONFIG)")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config value, e.g. --set train.learning_rate=0.0005",
    )
    parser.add_argument("--threads", type=int, help="BLAS/OpenMP threads; 1 gives reproducible runs")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)

    def dataset_args(p):
        p.add_argument("--dataset", help="Directory holding the canonical dataset files")
        p.add_argument("--column-map", help="YAML column map for non-canonical sources")

    p = sub.add_parser("ingest", help="Load, validate and filter the survey; write the canonical dataset")
    dataset_args(p)
    p.add_argument("--segments")
    p.add_argument("--participants")
    p.add_argument("--responses")
    p.add_argument("--out", help="Output directory for the canonical dataset")
    p.add_argument("--keep-invalid", action="store_true", help="Write the dataset before filtering")

    p = sub.add_parser("analyze", help="AC and Unsure tables")
    dataset_args(p)
    p.add_argument("--dims", nargs="+", help="participant/singer dimension pairs, e.g. gender sex")
    p.add_argument("--format", choices=["markdown", "md", "json", "csv", "all"], default="all")
    p.add_argument("--out", help="Output directory")

    p = sub.add_parser("featurize", help="Compute and cache log-mel features")
    dataset_args(p)
    p.add_argument("--audio-root")
    p.add_argument("--cache", help="Feature cache directory")

    p = sub.add_parser("train", help="Song-grouped k-fold cross-validation")
    dataset_args(p)
    p.add_argument("--audio-root")
    p.add_argument("--cache", help="Feature cache directory")
    p.add_argument("--validation-fraction", type=float)
    p.add_argument("--folds", type=int, nargs="+", help="Run only these fold indices")
    p.add_argument("--out", help="Output directory")

    p = sub.add_parser("predict", help="Score audio files with a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--in", dest="inputs", required=True, help="WAV file or directory")
    p.add_argument("--out", help="CSV path (default: <output_dir>/predictions.csv)")
    p.add_argument("--embedding", action="store_true", help="Add the 64-dim embedding columns")

    p = sub.add_parser("report", help="Re-render a stored JSON report")
    p.add_argument("--in", dest="inputs", required=True, help="report.json")
    p.add_argument("--format", choices=["markdown", "md", "json", "csv"], default="markdown")
    p.add_argument("--out", help="Output file (default: stdout)")

    p = sub.add_parser("synth", help="Write the separable synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--songs", type=int, default=200)
    p.add_argument("--seed", type=int, help="Corpus seed (default: the config seed)")
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )


FLAG_OVERRIDES = {
    "dataset": "dataset.directory",
    "segments": "dataset.segments",
    "participants": "dataset.participants",
    "responses": "dataset.responses",
    "column_map": "dataset.column_map",
    "audio_root": "dataset.audio_root",
    "cache": "feature_cache",
    "validation_fraction": "train.validation_fraction",
    "threads": "threads",
}
# Commands whose --out names the run output directory.
OUTPUT_DIR_COMMANDS = ("ingest", "analyze", "train")


def flag_overrides(args: argparse.Namespace) -> dict:
    """Config overrides from --set and from dedicated flags; dedicated flags win."""
    overrides = dict(parse_override(item) for item in args.overrides)
    for flag, key in FLAG_OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if args.command in OUTPUT_DIR_COMMANDS and args.out:
        overrides["output_dir"] = args.out
    return overrides


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        overrides = flag_overrides(args)
        config = load_run_config(args.config, overrides)
        # Must happen before numpy is imported by the command modules.
        for name in THREAD_ENV_VARS:
            os.environ[name] = str(config.threads)

        from cli import commands

        return getattr(commands, f"cmd_{args.command}")(args, config)
    except AppException as error:
        # Centralized handler for application exceptions
        logging.error("%s: %s", type(error).__name__, error.message)
        logging.debug("Traceback", exc_info=True)
        return error.exit_code


if __name__ == "__main__":
    sys.exit(main())
