# config.py
"""Run configuration: pydantic models, YAML loading and command-line overrides."""

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from exceptions import ConfigError, InvalidInputError

logger = logging.getLogger(__name__)

TOOL_VERSION = "1.0.0"
CONFIG_ENV_VAR = "PSVF_CONFIG"
OUTPUT_DIR_ENV_VAR = "PSVF_OUTPUT_DIR"


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class MelConfig(_Frozen):
    sample_rate: int = 16000
    window: int = 400
    hop: int = 160
    fft_size: int = 512
    n_mels: int = 24
    f_min: float = 20.0
    f_max: float = 7600.0
    log_floor: float = 1e-10
    cmvn: bool = True

    @model_validator(mode="after")
    def _check(self):
        if self.n_mels != 24:
            raise ValueError("n_mels is fixed at 24")
        if self.sample_rate <= 0 or self.hop <= 0 or self.window <= 0:
            raise ValueError("sample_rate, window and hop must be positive")
        if self.f_max > self.sample_rate / 2:
            raise ValueError("f_max must not exceed the Nyquist frequency")
        if not 0 <= self.f_min < self.f_max:
            raise ValueError("f_min must be in [0, f_max)")
        if self.window > self.fft_size:
            raise ValueError("window must not exceed fft_size")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")
        return self


class AugmentPolicy(_Frozen):
    enabled: bool = True
    speed_factors: List[float] = Field(default_factory=lambda: [0.9, 1.0, 1.1])
    stem_probability: float = 0.5
    rng_seed: int = 0

    @model_validator(mode="after")
    def _check(self):
        if not self.speed_factors or any(f <= 0 for f in self.speed_factors):
            raise ValueError("speed factors must be a non-empty set of positive reals")
        if not 0.0 <= self.stem_probability <= 1.0:
            raise ValueError("stem_probability must be in [0, 1]")
        return self


class BlockSpec(_Frozen):
    in_channels: int
    out_channels: int
    kernel: int
    dilation: int = 1

    @model_validator(mode="after")
    def _check(self):
        if min(self.in_channels, self.out_channels, self.kernel, self.dilation) < 1:
            raise ValueError("block dimensions must be positive")
        return self


def _default_blocks() -> List[BlockSpec]:
    return [
        BlockSpec(in_channels=24, out_channels=128, kernel=5, dilation=1),
        BlockSpec(in_channels=128, out_channels=128, kernel=3, dilation=2),
        BlockSpec(in_channels=128, out_channels=128, kernel=3, dilation=3),
        BlockSpec(in_channels=128, out_channels=128, kernel=1, dilation=1),
        BlockSpec(in_channels=128, out_channels=384, kernel=1, dilation=1),
    ]


class TdnnConfig(_Frozen):
    """TDNN x-vector layout.

    ``experimental`` lifts the 5-block / 24-bin / 64-dim layout constraints so
    that reduced networks (gradient checks, quick tests) can be built.
    """

    blocks: List[BlockSpec] = Field(default_factory=_default_blocks)
    embed_dim: int = 64
    frozen_blocks: int = 2
    experimental: bool = False

    @model_validator(mode="after")
    def _check(self):
        if not self.blocks:
            raise ValueError("at least one TDNN block is required")
        for prev, nxt in zip(self.blocks, self.blocks[1:]):
            if prev.out_channels != nxt.in_channels:
                raise ValueError(
                    f"block channels do not chain: {prev.out_channels} -> {nxt.in_channels}"
                )
        if not 0 <= self.frozen_blocks <= len(self.blocks):
            raise ValueError("frozen_blocks out of range")
        if self.embed_dim < 1:
            raise ValueError("embed_dim must be positive")
        if not self.experimental:
            if len(self.blocks) != 5:
                raise ValueError("exactly 5 TDNN blocks are required")
            if self.blocks[0].in_channels != 24:
                raise ValueError("first block must take 24 mel bins")
            if self.embed_dim != 64:
                raise ValueError("embed_dim must be 64")
        return self


class TrainConfig(_Frozen):
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 100
    patience: int = 10
    seed: int = 0
    k_folds: int = 5
    validation_fraction: float = 0.1
    # None defers to model.frozen_blocks.
    frozen_blocks: Optional[int] = None
    init_checkpoint: Optional[str] = None
    augment: AugmentPolicy = Field(default_factory=AugmentPolicy)

    @model_validator(mode="after")
    def _check(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1) or self.eps <= 0:
            raise ValueError("invalid Adam hyperparameters")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("batch_size, max_epochs and patience must be positive")
        if self.patience > self.max_epochs:
            raise ValueError("patience must not exceed max_epochs")
        if self.k_folds < 2:
            raise ValueError("k_folds must be at least 2")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in [0, 1)")
        if self.frozen_blocks is not None and self.frozen_blocks < 0:
            raise ValueError("frozen_blocks must be non-negative")
        return self


class AnalyticsSettings(_Frozen):
    # Tie rule: a segment mean of exactly 0 counts as aligned when True.
    zero_mean_aligned: bool = False
    unsure_threshold: float = 0.5
    unsure_inclusive: bool = False
    drop_incomplete_rows: bool = True


class DatasetPaths(_Frozen):
    # A directory of canonical files; explicit per-file paths take precedence.
    directory: Optional[str] = None
    segments: Optional[str] = None
    participants: Optional[str] = None
    responses: Optional[str] = None
    column_map: Optional[str] = None
    audio_root: Optional[str] = None


class RunConfig(_Frozen):
    dataset: DatasetPaths = Field(default_factory=DatasetPaths)
    analytics: AnalyticsSettings = Field(default_factory=AnalyticsSettings)
    mel: MelConfig = Field(default_factory=MelConfig)
    model: TdnnConfig = Field(default_factory=TdnnConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    output_dir: str = "runs/default"
    feature_cache: Optional[str] = None
    seed: int = 0
    threads: int = 1

    @model_validator(mode="after")
    def _check(self):
        if frozen_blocks_conflict(self.model, self.train):
            raise ValueError(
                f"train.frozen_blocks={self.train.frozen_blocks} disagrees with "
                f"model.frozen_blocks={self.model.frozen_blocks}"
            )
        return self


def frozen_blocks_conflict(model: TdnnConfig, train: TrainConfig) -> bool:
    return train.frozen_blocks is not None and train.frozen_blocks != model.frozen_blocks


def effective_frozen_blocks(model: TdnnConfig, train: TrainConfig) -> int:
    """Frozen block count a run trains with: model.frozen_blocks unless train.frozen_blocks is set."""
    return model.frozen_blocks if train.frozen_blocks is None else train.frozen_blocks


def _set_dotted(target: Dict[str, Any], dotted: str, value: Any) -> None:
    node = target
    parts = dotted.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"Override {dotted!r} descends into a scalar")
    node[parts[-1]] = value


def parse_override(text: str):
    """Splits ``key.path=value``; the value is parsed as YAML (so 0.1, true, [1, 2] work)."""
    if "=" not in text:
        raise ConfigError(f"Override must look like key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        return key.strip(), yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse override value {raw!r}: {e}") from e


def default_config_path() -> Optional[str]:
    return os.getenv(CONFIG_ENV_VAR)


def load_run_config(
    path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """
    Loads a RunConfig from a YAML file and applies dotted-key overrides.

    Args:
        path: YAML file; when None the ``PSVF_CONFIG`` environment variable is
              consulted, and defaults are used if that is unset too.
        overrides: mapping of dotted keys (``train.learning_rate``) to values.
                   Overrides win over file values.

    Returns:
        RunConfig: the fully resolved configuration.
    """
    path = path or default_config_path()
    raw: Dict[str, Any] = {}
    if path:
        config_file = Path(path)
        if not config_file.is_file():
            raise InvalidInputError(f"Config file not found: {config_file}")
        try:
            raw = yaml.safe_load(config_file.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Cannot parse config {config_file}: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"Config {config_file} must be a mapping at top level")
        logger.debug("Loaded config from %s", config_file)

    if "output_dir" not in raw and os.getenv(OUTPUT_DIR_ENV_VAR):
        raw["output_dir"] = os.getenv(OUTPUT_DIR_ENV_VAR)

    for key, value in (overrides or {}).items():
        if value is not None:
            _set_dotted(raw, key, value)

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


def config_hash(config: BaseModel) -> str:
    payload = json.dumps(config.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def write_run_stamp(config: RunConfig, output_dir: Path) -> None:
    """Writes the resolved config and the tool-version stamp into an output directory."""
    output_dir.mkdir(parents=True, exist_ok=True)
    (output_dir / "resolved_config.yaml").write_text(
        yaml.safe_dump(config.model_dump(mode="json"), sort_keys=True),
        encoding="utf-8",
    )
    (output_dir / "VERSION").write_text(f"psvf {TOOL_VERSION}\n", encoding="utf-8")
