# features/mel_processor.py
"""Log-mel frontend: Hann framing, power spectrum, HTK mel filterbank, log, per-segment CMVN."""

from dataclasses import dataclass
from functools import lru_cache

import librosa
import numpy as np
from scipy import signal

from config import MelConfig
from exceptions import FeatureError, TooShort
from .audio_loader import Waveform


@dataclass(frozen=True)
class MelSpec:
    matrix: np.ndarray  # frames x n_mels
    config: MelConfig

    @property
    def frames(self) -> int:
        return self.matrix.shape[0]


def frame_count(n_samples: int, cfg: MelConfig) -> int:
    if n_samples < cfg.window:
        return 0
    return 1 + (n_samples - cfg.window) // cfg.hop


@lru_cache(maxsize=8)
def mel_filterbank(cfg: MelConfig) -> np.ndarray:
    """Triangular HTK-scale filters with area (Slaney) normalization, shape n_mels x (fft_size/2 + 1)."""
    return librosa.filters.mel(
        sr=cfg.sample_rate,
        n_fft=cfg.fft_size,
        n_mels=cfg.n_mels,
        fmin=cfg.f_min,
        fmax=cfg.f_max,
        htk=True,
        norm="slaney",
        dtype=np.float64,
    )


@lru_cache(maxsize=8)
def _window(length: int) -> np.ndarray:
    return signal.get_window("hann", length, fftbins=True)


def melspectrogram(waveform: Waveform, cfg: MelConfig) -> MelSpec:
    """
    Computes the frames x 24 log-mel matrix of a waveform.

    Frames are not centered: frame t covers samples [t*hop, t*hop + window).
    """
    if waveform.sample_rate != cfg.sample_rate:
        raise FeatureError(
            f"Waveform rate {waveform.sample_rate} Hz does not match config rate {cfg.sample_rate} Hz"
        )
    n = len(waveform)
    if n < cfg.window:
        raise TooShort(f"{n} samples is shorter than one {cfg.window}-sample window")

    samples = np.asarray(waveform.samples, dtype=np.float64)
    frames = np.lib.stride_tricks.sliding_window_view(samples, cfg.window)[:: cfg.hop]
    spectrum = np.fft.rfft(frames * _window(cfg.window), n=cfg.fft_size, axis=1)
    power = spectrum.real**2 + spectrum.imag**2
    energies = power @ mel_filterbank(cfg).T
    log_mel = np.log(np.maximum(energies, cfg.log_floor))
    if cfg.cmvn:
        log_mel = log_mel - log_mel.mean(axis=0, keepdims=True)
    return MelSpec(matrix=log_mel, config=cfg)
