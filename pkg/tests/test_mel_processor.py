import numpy as np
import pytest

from config import MelConfig
from conftest import tone
from exceptions import FeatureError, TooShort
from features.audio_loader import Waveform
from features.mel_processor import frame_count, mel_filterbank, melspectrogram


def test_frame_count_formula_on_random_lengths():
    cfg = MelConfig(cmvn=False)
    rng = np.random.default_rng(0)
    for n in rng.integers(400, 20000, size=1000):
        mel = melspectrogram(Waveform(np.zeros(int(n), dtype=np.float32), 16000), cfg)
        assert mel.matrix.shape == (1 + (int(n) - 400) // 160, 24)
        assert mel.frames == frame_count(int(n), cfg)


def test_three_second_segment_has_298_frames():
    assert frame_count(48000, MelConfig()) == 298


def test_silence_is_the_log_floor():
    cfg = MelConfig(cmvn=False)
    mel = melspectrogram(Waveform(np.zeros(16000, dtype=np.float32), 16000), cfg)
    assert np.all(mel.matrix == np.log(1e-10))


def test_cmvn_centres_every_bin():
    mel = melspectrogram(Waveform(tone(300.0) + 0.01, 16000), MelConfig())
    assert np.allclose(mel.matrix.mean(axis=0), 0.0, atol=1e-9)


def test_each_fft_bin_feeds_at_most_two_adjacent_filters():
    bank = mel_filterbank(MelConfig())
    assert np.all(bank >= 0)
    for column in bank.T:
        rows = np.flatnonzero(column)
        assert len(rows) <= 2
        if len(rows) == 2:
            assert rows[1] == rows[0] + 1


def test_filterbank_shape_and_peak_bin():
    cfg = MelConfig(cmvn=False)
    bank = mel_filterbank(cfg)
    assert bank.shape == (24, 257)
    mel = melspectrogram(Waveform(tone(1000.0), 16000), cfg)
    strongest = int(np.argmax(mel.matrix.mean(axis=0)))
    bin_of_1k = int(round(1000.0 * 512 / 16000))
    assert bank[strongest, bin_of_1k] > 0


def test_too_short_and_rate_mismatch():
    with pytest.raises(TooShort):
        melspectrogram(Waveform(np.zeros(399, dtype=np.float32), 16000), MelConfig())
    with pytest.raises(FeatureError):
        melspectrogram(Waveform(np.zeros(16000, dtype=np.float32), 8000), MelConfig())


def test_invalid_config():
    with pytest.raises(ValueError):
        MelConfig(n_mels=40)
    with pytest.raises(ValueError):
        MelConfig(f_max=9000.0)
