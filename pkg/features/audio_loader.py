# features/audio_loader.py

import logging
from dataclasses import dataclass
from math import gcd
from pathlib import Path
from typing import Union

import numpy as np
from scipy import signal
from scipy.io import wavfile

from exceptions import AudioIoError, FeatureError, OutOfRange, UnsupportedFormat

logger = logging.getLogger(__name__)

_INT_SCALE = {np.dtype("int16"): 32768.0, np.dtype("int32"): 2147483648.0}


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise FeatureError("sample_rate must be positive")
        if self.samples.ndim != 1:
            raise FeatureError("waveform must be mono")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def resample(samples: np.ndarray, source_rate: int, target_rate: int) -> np.ndarray:
    """Polyphase windowed-sinc resampling (Kaiser-windowed FIR)."""
    if source_rate == target_rate:
        return samples
    divisor = gcd(int(source_rate), int(target_rate))
    up, down = int(target_rate) // divisor, int(source_rate) // divisor
    return signal.resample_poly(samples, up, down)


def load_audio(path: Union[str, Path], target_rate: int = 16000) -> Waveform:
    """
    Loads a linear PCM WAV file as a mono waveform at ``target_rate``.

    Args:
        path: WAV file (16/32-bit integer or 32/64-bit float samples, any
              channel count or sample rate).
        target_rate: output sample rate in Hz.

    Returns:
        Waveform: channel-averaged, resampled samples clipped to [-1, 1].
    """
    path = Path(path)
    try:
        rate, data = wavfile.read(path)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as e:
        raise AudioIoError(f"Cannot read audio file {path}: {e}") from e
    except ValueError as e:
        raise UnsupportedFormat(f"{path} is not a supported WAV file: {e}") from e
    except OSError as e:
        raise AudioIoError(f"Cannot read audio file {path}: {e}") from e

    if data.dtype in _INT_SCALE:
        samples = data.astype(np.float64) / _INT_SCALE[data.dtype]
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise UnsupportedFormat(f"{path}: unsupported sample type {data.dtype}")

    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    samples = resample(samples, rate, target_rate)
    samples = np.clip(np.nan_to_num(samples), -1.0, 1.0)
    return Waveform(samples=samples.astype(np.float32), sample_rate=target_rate)


def write_wav(path: Union[str, Path], waveform: Waveform) -> None:
    """Writes 16-bit PCM."""
    pcm = np.round(np.clip(waveform.samples, -1.0, 1.0) * 32767.0).astype(np.int16)
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        wavfile.write(Path(path), waveform.sample_rate, pcm)
    except OSError as e:
        raise AudioIoError(f"Cannot write audio file {path}: {e}") from e


def extract_segment(waveform: Waveform, start: float, duration: float) -> Waveform:
    """
    Slices ``round(duration * rate)`` samples starting at ``start`` seconds.

    A tail running past the end of the audio is zero-padded with a warning;
    a start beyond the end raises OutOfRange.
    """
    if start < 0 or duration <= 0:
        raise OutOfRange(f"Invalid segment start={start} duration={duration}")
    rate = waveform.sample_rate
    begin = int(round(start * rate))
    length = int(round(duration * rate))
    if begin >= len(waveform):
        raise OutOfRange(
            f"Segment start {start:.3f}s is beyond the audio end ({waveform.duration:.3f}s)"
        )
    piece = waveform.samples[begin : begin + length]
    if len(piece) < length:
        logger.warning(
            "Segment at %.3fs runs %d samples past the audio end; zero-padding",
            start,
            length - len(piece),
        )
        piece = np.concatenate([piece, np.zeros(length - len(piece), dtype=piece.dtype)])
    return Waveform(samples=piece.copy(), sample_rate=rate)
