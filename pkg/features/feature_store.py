# features/feature_store.py

import logging
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple, Union

import numpy as np

from config import AugmentPolicy, MelConfig
from dataset.records import SegmentMeta
from exceptions import AppException, MissingFeatures
from .audio_loader import Waveform, extract_segment, load_audio
from .augmentation import choose_source, choose_speed, segment_rng, speed_perturb
from .feature_cache import cache_path, load_matrix, save_matrix
from .mel_processor import melspectrogram

logger = logging.getLogger(__name__)


class FeatureStore:
    """
    Supplies model inputs per segment.

    Clean features come from memory, then the on-disk cache, then the audio.
    Augmented features are always recomputed from audio with a stream seeded
    by (policy seed, epoch, segment_id).
    """

    def __init__(
        self,
        segments: Iterable[SegmentMeta],
        mel_config: MelConfig,
        audio_root: Optional[Union[str, Path]] = None,
        cache_dir: Optional[Union[str, Path]] = None,
    ):
        self.segments = {s.segment_id: s for s in segments}
        self.mel_config = mel_config
        self.audio_root = Path(audio_root) if audio_root else None
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self._features: Dict[str, np.ndarray] = {}
        self._clips: Dict[Tuple[str, str], Waveform] = {}

    def put(self, segment_id: str, matrix: np.ndarray) -> None:
        self._features[segment_id] = np.asarray(matrix, dtype=np.float32)

    def resolve(self, ref: str) -> Path:
        path = Path(ref)
        if not path.is_absolute() and self.audio_root is not None:
            path = self.audio_root / path
        return path

    def _clip(self, segment: SegmentMeta, ref: str) -> Waveform:
        key = (segment.segment_id, ref)
        if key not in self._clips:
            song = load_audio(self.resolve(ref), self.mel_config.sample_rate)
            self._clips[key] = extract_segment(song, segment.start_time, segment.duration)
        return self._clips[key]

    def features(self, segment_id: str) -> np.ndarray:
        """Clean (unaugmented) frames x 24 features of a segment."""
        if segment_id in self._features:
            return self._features[segment_id]
        if self.cache_dir is not None:
            cached = cache_path(self.cache_dir, segment_id)
            if cached.is_file():
                self._features[segment_id] = load_matrix(cached)
                return self._features[segment_id]

        segment = self.segments.get(segment_id)
        if segment is None or not segment.audio_ref:
            raise MissingFeatures(f"No features or audio for segment {segment_id!r}")
        try:
            clip = self._clip(segment, segment.audio_ref)
            matrix = melspectrogram(clip, self.mel_config).matrix.astype(np.float32)
        except AppException as e:
            raise MissingFeatures(f"Cannot featurize segment {segment_id!r}: {e}") from e
        if self.cache_dir is not None:
            save_matrix(cache_path(self.cache_dir, segment_id), matrix)
        self._features[segment_id] = matrix
        return matrix

    def augmented(self, segment_id: str, policy: AugmentPolicy, epoch: int) -> np.ndarray:
        """Source choice, speed change, then the log-mel frontend."""
        segment = self.segments.get(segment_id)
        if segment is None or not segment.audio_ref:
            # Only precomputed features exist; augmentation is not possible.
            return self.features(segment_id)
        rng = segment_rng(policy.rng_seed, segment_id, epoch)
        source = choose_source(segment, policy, rng)
        factor = choose_speed(policy, rng)
        try:
            clip = speed_perturb(self._clip(segment, source), factor)
            return melspectrogram(clip, self.mel_config).matrix.astype(np.float32)
        except AppException as e:
            raise MissingFeatures(f"Cannot featurize segment {segment_id!r}: {e}") from e

    def populate(self, segment_ids: Iterable[str]) -> int:
        """Featurizes (and caches) every listed segment; returns how many were computed."""
        count = 0
        for segment_id in segment_ids:
            self.features(segment_id)
            count += 1
        logger.info("Featurized %d segments", count)
        return count
