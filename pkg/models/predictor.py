# models/predictor.py

from dataclasses import dataclass
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from config import MelConfig
from features.audio_loader import Waveform, load_audio
from features.mel_processor import melspectrogram
from .tdnn import TdnnModel

logger = logging.getLogger(__name__)

WINDOW_SECONDS = 3.0
HOP_SECONDS = 1.5


@dataclass(frozen=True)
class WindowScore:
    start: float
    score: float
    embedding: Optional[np.ndarray] = None


@dataclass(frozen=True)
class FilePrediction:
    path: str
    mean_score: float
    windows: List[WindowScore]
    padded: bool


def window_starts(n_samples: int, window: int, hop: int) -> List[int]:
    """
    Window start offsets covering the whole signal.

    Windows advance by ``hop``; when the last regular window stops short of the
    end, one more window aligned to the end is added. A signal no longer than
    one window gets a single window at 0.
    """
    if n_samples <= window:
        return [0]
    starts = list(range(0, n_samples - window + 1, hop))
    if starts[-1] + window < n_samples:
        starts.append(n_samples - window)
    return starts


def score_waveform(
    model: TdnnModel,
    waveform: Waveform,
    mel_config: MelConfig,
    window_seconds: float = WINDOW_SECONDS,
    hop_seconds: float = HOP_SECONDS,
    with_embedding: bool = False,
) -> List[WindowScore]:
    window = int(round(window_seconds * waveform.sample_rate))
    hop = int(round(hop_seconds * waveform.sample_rate))
    samples = waveform.samples
    if len(samples) < window:
        samples = np.concatenate([samples, np.zeros(window - len(samples), dtype=samples.dtype)])

    scores = []
    for start in window_starts(len(samples), window, hop):
        clip = Waveform(samples=samples[start : start + window], sample_rate=waveform.sample_rate)
        out = model.forward(melspectrogram(clip, mel_config).matrix)
        scores.append(
            WindowScore(
                start=start / waveform.sample_rate,
                score=float(out.score),
                embedding=out.embedding.copy() if with_embedding else None,
            )
        )
    return scores


def predict_file(
    model: TdnnModel,
    path: Union[str, Path],
    mel_config: MelConfig,
    with_embedding: bool = False,
) -> FilePrediction:
    """Scores 3 s windows with a 1.5 s hop; the file score is the window mean."""
    waveform = load_audio(path, mel_config.sample_rate)
    padded = waveform.duration < WINDOW_SECONDS
    if padded:
        logger.warning("%s is shorter than one window; zero-padded to %.1f s", path, WINDOW_SECONDS)
    windows = score_waveform(model, waveform, mel_config, with_embedding=with_embedding)
    return FilePrediction(
        path=str(path),
        mean_score=float(np.mean([w.score for w in windows])),
        windows=windows,
        padded=padded,
    )
